use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index {index} out of range (len {len})")]
    Range { index: usize, len: usize },

    #[error("column {column} has zero standard deviation")]
    DegenerateColumn { column: usize },

    #[error("cannot stratify: {0}")]
    Stratification(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("oracle transport failure: {0}")]
    OracleTransport(String),

    #[error("protocol error: {message} (line: {line:?})")]
    Protocol { message: String, line: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("gaussian process fit failed: {0}")]
    Fit(String),

    #[error("training failed: {0}")]
    Training(String),

    #[error("metric error: {0}")]
    Metric(String),

    #[error("comparison error: {0}")]
    Comparison(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("format error in {path:?}: {message}")]
    Format { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
