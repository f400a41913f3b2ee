use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("schema error: {0}")]
    Schema(String),

    #[error("{path}: row {row}, column `{column}`: {message}")]
    Load { path: PathBuf, row: usize, column: String, message: String },

    #[error("{path}: missing column `{column}`")]
    MissingColumn { path: PathBuf, column: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("feature {0} is already acquired")]
    AlreadyAcquired(usize),

    #[error("feature index {index} out of range for {count} features")]
    FeatureOutOfRange { index: usize, count: usize },

    #[error("sample index {index} out of range for {count} samples")]
    SampleOutOfRange { index: usize, count: usize },

    #[error("state is terminal: every feature is acquired")]
    Terminal,

    #[error("node has no visited children")]
    NoVisitedChildren,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("training diverged at epoch {epoch}: loss {loss}")]
    Divergence { epoch: usize, loss: f64 },

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error("io error on {path}: {source}")]
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
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
