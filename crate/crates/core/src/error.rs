use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, DeedError>;

#[derive(Debug, Error)]
pub enum DeedError {
    /// A record or header violates a data-model invariant.
    #[error("validation error: {0}")]
    Validation(String),
    /// Bad magic, unsupported version or malformed header/document.
    #[error("format error: {0}")]
    Format(String),
    /// Payload length disagrees with the declared structure.
    #[error("corruption error: {0}")]
    Corruption(String),
    /// Caller-supplied argument outside the accepted domain.
    #[error("parameter error: {0}")]
    Parameter(String),
    /// Train and test sets share fact ids.
    #[error("contamination error: {0}")]
    Contamination(String),
    #[error("empty result: {0}")]
    EmptyResult(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl DeedError {
    /// True for errors caused by the storage layer rather than by the data
    /// or the request (I/O, format and corruption errors).
    pub fn is_storage(&self) -> bool {
        matches!(
            self,
            DeedError::Io(_) | DeedError::Format(_) | DeedError::Corruption(_)
        )
    }
}

impl From<csv::Error> for DeedError {
    fn from(err: csv::Error) -> Self {
        match err.into_kind() {
            csv::ErrorKind::Io(e) => DeedError::Io(e),
            other => DeedError::Format(format!("{other:?}")),
        }
    }
}
