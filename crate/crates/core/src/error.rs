use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Inconsistent or out-of-range construction parameters.
    #[error("invalid parameter: {0}")]
    Parameter(String),
    /// An argument outside the domain of a mathematical operation.
    #[error("domain error: {0}")]
    Domain(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
