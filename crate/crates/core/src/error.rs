use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("basis is not orthonormal (max deviation {0:e})")]
    NonOrthonormal(f64),
    #[error("solver guard exceeded: {0}")]
    GuardExceeded(String),
    #[error("empty series")]
    EmptySeries,
    #[error("degenerate series: {0}")]
    DegenerateSeries(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("config: {0}")]
    Config(String),
    #[error("polytope is not centrally symmetric")]
    NonSymmetric,
}

pub type Result<T> = std::result::Result<T, Error>;
