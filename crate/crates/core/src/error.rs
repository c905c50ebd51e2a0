use std::path::PathBuf;

use chrono::NaiveDate;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed row at line {line}: {reason}")]
    Malformed { line: usize, reason: String },

    #[error("{reason} at line {line}")]
    InvalidPrice { line: usize, reason: String },

    #[error("duplicate date {date} at line {line}")]
    DuplicateDate { date: NaiveDate, line: usize },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("skip rate {percent}% exceeds 1% ({skipped} of {total} lines unreadable)")]
    SkipRate {
        skipped: usize,
        total: usize,
        percent: String,
    },

    #[error("date range error: {0}")]
    Range(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("training diverged at epoch {epoch}: validation MSE {val_mse}")]
    Divergence { epoch: usize, val_mse: f64 },

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
