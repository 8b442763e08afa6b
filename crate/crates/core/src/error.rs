use thiserror::Error;

/// Errors raised by the numerical kernels, solvers and instance I/O.
#[derive(Debug, Error)]
pub enum DcError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("matrix is not positive definite (pivot {pivot} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("{what} did not converge within {iters} iterations")]
    ConvergenceFailure { what: &'static str, iters: usize },

    #[error("singular system: {0}")]
    SingularSystem(String),

    #[error("{what} hit the iteration cap ({iters})")]
    MaxIterExceeded { what: &'static str, iters: usize },

    #[error("infeasible parameters: {0}")]
    InfeasibleParameters(String),

    #[error("dual bound violated at k={k}: |lambda| = {norm} > {bound}")]
    DualBoundViolated { k: usize, norm: f64, bound: f64 },

    #[error("potential fell below floor at k={k}: {value} < {floor}")]
    PotentialBelowFloor { k: usize, value: f64, floor: f64 },

    #[error("bad dimensions: {0}")]
    BadDims(String),

    #[error("constraint matrix is rank deficient after {retries} retries")]
    RankDeficient { retries: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, DcError>;
