use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid dimensions: {0}")]
    InvalidDims(String),

    #[error("operator is not symmetric: {0}")]
    NotSymmetric(String),

    #[error("singular operator: {0}")]
    Singular(String),

    #[error("negative eigenvalue {value:e} (index {index}) cannot be raised to power {exponent}")]
    NegativeEigenvalue {
        index: usize,
        value: f64,
        exponent: f64,
    },

    #[error("operator is not positive definite: {0}")]
    NotPositiveDefinite(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("size guard: dimension {size} exceeds limit {limit}")]
    TooLarge { size: usize, limit: usize },

    #[error("solver did not converge after {iterations} iterations (relres {relres:e})")]
    NotConverged { iterations: usize, relres: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
