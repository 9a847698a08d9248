use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A value fell outside the domain of a formula (zero variance, |correlation| > 1, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Malformed or version-mismatched sweep file.
    #[error("format error: {0}")]
    Format(String),

    #[error("I/O failure on {}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl Error {
    /// True for errors caused by bad caller input rather than by the environment.
    pub fn is_argument_error(&self) -> bool {
        !matches!(self, Error::Io { .. } | Error::Format(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
