use std::path::PathBuf;

use thiserror::Error;

/// Errors produced while building, training on, or evaluating a social rating network.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("{kind} index {index} out of range (count {count})")]
    IndexOutOfRange {
        kind: &'static str,
        index: usize,
        count: usize,
    },

    #[error("self-loop on user {0}")]
    SelfLoop(usize),

    #[error("duplicate rating for user {user}, item {item}")]
    DuplicateRating { user: usize, item: usize },

    #[error("invalid rating value {0}: must be finite and non-negative")]
    InvalidRating(f64),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("training diverged at iteration {iteration}: {reason}")]
    Divergence { iteration: usize, reason: String },

    #[error("no scorable test entries")]
    NoScorableEntries,

    #[error("unknown label {0:?}")]
    UnknownLabel(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by the input data rather than by a failed run.
    pub fn is_data_error(&self) -> bool {
        !matches!(self, Error::Divergence { .. } | Error::InvalidParam(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
