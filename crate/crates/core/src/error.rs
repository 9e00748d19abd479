use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the numeric and I/O layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("row {row}: {message}")]
    InvalidRow { row: usize, message: String },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("Matsubara sum not converged after {0} terms")]
    Truncation(usize),

    #[error("series did not converge: {0}")]
    Series(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for failures of the numerical machinery (quadrature, series, truncation).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Quadrature(_) | Error::Truncation(_) | Error::Series(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
