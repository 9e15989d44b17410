//! Small dense real/complex linear algebra (n <= 4 for eigenproblems).

mod eigen;
mod matrix;
mod subspace;

pub use eigen::{
    characteristic_polynomial, eigen_small, eigen_small_complex, eigenvalues_small, polynomial_roots, EigenPair,
    MAX_ROOT_ITERATIONS,
};
pub use matrix::{det, inverse, solve_dense, vec_norm, CMatrix, Lu, Matrix, RMatrix, Scalar, C64, PIVOT_TOL};
pub use subspace::{
    orthonormalize_columns, singular_values, spectral_split, subspace_gap, unstable_subspace_complex, SpectralSplit,
    DEFAULT_REALPART_TOL,
};
