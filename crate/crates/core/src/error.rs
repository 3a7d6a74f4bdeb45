//! Crate-wide error type. Variants follow the failure classes the CLI maps
//! onto exit codes: invalid arguments (2), I/O and format problems (1).

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Caller violated a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Lookup by id failed.
    #[error("not found: {0}")]
    NotFound(String),

    /// Underlying I/O failure, annotated with the path involved.
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A file exists but its contents do not match the expected format.
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },

    /// Image decode/encode failure, annotated with the path involved.
    #[error("{}: {message}", path.display())]
    Image { path: PathBuf, message: String },

    /// Training diverged; carries the offending ladder id.
    #[error("non-finite loss while processing ladder {ladder_id}")]
    NonFiniteLoss { ladder_id: String },

    /// A statistic is undefined on this input (zero variance, no spread).
    #[error("degenerate input: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format { path: path.into(), message: message.into() }
    }
}
