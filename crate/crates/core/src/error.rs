use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix size {0} outside the supported range 1..=4")]
    UnsupportedSize(usize),

    #[error("polynomial root finder did not converge in {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("defective eigenvalue {eigenvalue}: geometric multiplicity below algebraic")]
    Defective { eigenvalue: String },

    #[error("eigenvalue {eigenvalue} lies within {tol:e} of the imaginary axis (characteristic boundary)")]
    CharacteristicBoundary { eigenvalue: String, tol: f64 },

    #[error("singular matrix (pivot {pivot:e})")]
    SingularMatrix { pivot: f64 },

    #[error("rank-deficient input: {0}")]
    RankDeficient(String),

    #[error("f'(u) vanishes or changes sign near grid point {index}")]
    DegenerateSign { index: usize },

    #[error("Newton iteration failed after {iterations} iterations (residual {residual:e})")]
    NewtonFailure { iterations: usize, residual: f64 },

    #[error("CFL violated: tau*speed/h = {ratio} exceeds {limit}")]
    CflViolation { ratio: f64, limit: f64 },

    #[error("non-finite value produced at step {step}")]
    NonFinite { step: usize },

    #[error("grids are not nested: {0}")]
    NonNested(String),

    #[error("boundary layer datum not admissible: {0}")]
    InadmissibleLayer(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
