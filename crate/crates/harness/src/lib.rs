//! Experiment registry, error norms, convergence studies and CSV output for
//! the `relaxbl-core` solvers, plus the `relaxbl` command line.

pub mod cli;
pub mod config;
pub mod error;
pub mod examples;
pub mod norms;
pub mod output;
pub mod study;

pub use cli::run_cli;
pub use error::{HarnessError, Result};
