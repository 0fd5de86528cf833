use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid protograph: {0}")]
    InvalidProtograph(String),

    #[error("lifting failed: {0}")]
    Lifting(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("threshold not bracketed: {0}")]
    Unbracketed(String),

    #[error("missing density-evolution trace: {0}")]
    MissingTrace(String),

    /// The performance constraint cannot be met anywhere in the searched set.
    #[error("constraint infeasible: {0}")]
    Infeasible(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
