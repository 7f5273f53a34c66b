use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("motif with {0} vertices is outside the supported range 2..=8")]
    UnsupportedMotifSize(usize),

    #[error("motif with {motif} vertices does not fit in a graph with {graph} nodes")]
    MotifTooLarge { motif: usize, graph: usize },

    #[error("unsupported method: {0}")]
    UnsupportedMethod(String),

    #[error("census too large: {0}")]
    CensusTooLarge(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("configuration error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("need at least {required} samples, got {actual}")]
    TooFewSamples { required: usize, actual: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
