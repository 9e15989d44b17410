//! Finite-difference solvers for initial-boundary value problems of 1D
//! hyperbolic relaxation systems `U_t + A U_x = Q(U)/eps`.
//!
//! The crate provides the classical first-order upwind IMEX scheme and a
//! boundary asymptotic-preserving (BAP) variant whose flux splitting follows
//! the eigenstructure of `A^{-1}(I - eta Q)`, so that boundary and interface
//! layers thinner than the mesh are still captured in the stiff limit.
//!
//! Modules:
//! - [`linalg`]: small dense eigenproblems, invariant-subspace splits.
//! - [`models`]: the Jin-Xin model and general linear relaxation systems.
//! - [`schemes`]: time steppers and the IBVP driver.
//! - [`interface`]: problems with a discontinuous relaxation time.
//! - [`reference`]: asymptotic/closed-form reference solutions.

pub mod error;
pub mod interface;
pub mod linalg;
pub mod models;
pub mod reference;
pub mod schemes;

pub use error::{Error, Result};
