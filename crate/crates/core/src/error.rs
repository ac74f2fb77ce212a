use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("vector {index} is not unit norm (norm {norm})")]
    NonUnitNorm { index: usize, norm: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("invalid label: {0}")]
    InvalidLabel(String),

    #[error("inconsistent clustering: {0}")]
    InconsistentClustering(String),

    #[error("malformed {kind} data at byte offset {offset}: {message}")]
    Format {
        kind: &'static str,
        offset: u64,
        message: String,
    },

    #[error("numeric failure: {0}")]
    NumericFailure(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn dim(expected: usize, found: usize) -> Self {
        Error::Dimension { expected, found }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
