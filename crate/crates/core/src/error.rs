use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no registrable domain in {0:?}")]
    InvalidDomain(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}:{line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("feature dimension mismatch: model expects {expected}, input has {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("evaluation requires a non-empty test set")]
    EmptyTestSet,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by malformed user input rather than the environment.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidDomain(_)
                | Error::Csv { .. }
                | Error::Format { .. }
                | Error::Json(_)
                | Error::InvalidParameter(_)
        )
    }
}
