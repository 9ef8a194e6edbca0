//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by the norm pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument was outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A structural precondition (e.g. a normalized leading coefficient) was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A numerical procedure failed to converge or produced an unusable result.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The operation is not defined for the requested parameters.
    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Matrix or report (de)serialization failed.
    #[error("parse error: {0}")]
    Parse(String),
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Parse(err.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Parse(err.to_string())
    }
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
