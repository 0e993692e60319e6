use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Caller handed in something structurally wrong (bad shape, bad
    /// range, missing pieces). Maps to CLI exit code 2.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A numeric kernel was evaluated outside its domain.
    #[error("out of domain: {0}")]
    OutOfDomain(String),

    /// Text parse failure with file/line attribution.
    #[error("parse error at {path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// Filesystem or image codec failure. Maps to CLI exit code 3.
    #[error("I/O failure on {path}: {message}")]
    Io { path: PathBuf, message: String },
}

impl Error {
    pub fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidInput(message.into())
    }

    pub fn domain(message: impl Into<String>) -> Self {
        Error::OutOfDomain(message.into())
    }

    pub fn io(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        Error::Io {
            path: path.into(),
            message: err.to_string(),
        }
    }

    /// True for errors that should surface as exit code 3 (I/O) rather
    /// than 2 (invalid input).
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}
