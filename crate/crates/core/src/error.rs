use std::path::PathBuf;

use crate::descent::DescentTrace;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("centering error: {0}")]
    Centering(String),

    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    /// The optimizer produced a non-finite loss. The trace holds every
    /// iteration recorded before the failure.
    #[error("loss diverged at iteration {iteration}")]
    Divergence {
        iteration: usize,
        trace: Box<DescentTrace>,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("parse error at row {row}, column {col}: {message}")]
    ParseCell {
        row: u64,
        col: usize,
        message: String,
    },

    #[error("malformed model document: {0}")]
    ModelFormat(String),

    #[error("unsupported model format_version {found} (expected {expected})")]
    UnsupportedVersion { found: u64, expected: u64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    /// True for failures of the numerics themselves (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Degenerate(_) | Error::Divergence { .. })
    }
}
