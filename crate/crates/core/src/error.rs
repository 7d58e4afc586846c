use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Error)]
pub enum LabError {
    /// A parameter lies outside the range an operation accepts.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// The input is well formed but the operation is undefined on it.
    #[error("domain error: {0}")]
    Domain(String),

    /// A formula was evaluated outside the range in which it is stated.
    #[error("range error: {0}")]
    Range(String),

    /// A size guard was exceeded (atoms, grid points, pairs).
    #[error("resource error: {0}")]
    Resource(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn param(msg: impl Into<String>) -> LabError {
    LabError::Parameter(msg.into())
}

pub(crate) fn domain(msg: impl Into<String>) -> LabError {
    LabError::Domain(msg.into())
}

pub(crate) fn resource(msg: impl Into<String>) -> LabError {
    LabError::Resource(msg.into())
}

pub(crate) fn range(msg: impl Into<String>) -> LabError {
    LabError::Range(msg.into())
}
