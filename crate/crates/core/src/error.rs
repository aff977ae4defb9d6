use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("element index {index} out of range (mesh has {count} elements)")]
    ElementOutOfRange { index: usize, count: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("linear solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    SolverNotConverged { iterations: usize, residual: f64 },

    #[error("Picard iteration did not converge after {iterations} iterations (last change {change:e})")]
    PicardNotConverged { iterations: usize, change: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("negative initial data: {0}")]
    NegativeInitialData(String),
}

pub type Result<T> = std::result::Result<T, Error>;
