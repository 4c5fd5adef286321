use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A tuning parameter is out of its documented range (e.g. `K >= N`).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    /// Input data violates a precondition (non-finite coordinate, length
    /// mismatch, malformed probability vector, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// An operation was called on an object that cannot serve it (empty
    /// index, component smaller than the target dimension, ...).
    #[error("invalid state: {0}")]
    InvalidState(String),
    /// A numerical routine failed to produce a usable result.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    /// A file or stream did not match the expected format.
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
