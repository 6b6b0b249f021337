use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("missing sidecar metadata file {0}")]
    MissingSidecar(PathBuf),

    #[error("malformed header: {0}")]
    MalformedHeader(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("non-finite sample in channel {channel} at index {index}")]
    NonFiniteSample { channel: usize, index: usize },

    #[error("ragged channel lengths: {0}")]
    RaggedChannels(String),

    #[error("invalid label {0:?}: labels must be 0 (WS) or 1 (BS)")]
    InvalidLabel(String),

    #[error("non-uniform stride at row {row}: expected t = {expected}, found {found}")]
    NonUniformStride {
        row: usize,
        expected: f64,
        found: f64,
    },

    #[error("degenerate signal: zero dynamic range")]
    DegenerateSignal,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("channel mismatch: {0}")]
    ChannelMismatch(String),

    #[error("time grid mismatch: {0}")]
    GridMismatch(String),

    #[error("training labels contain a single class")]
    SingleClass,

    #[error("streaming classifier is not calibrated")]
    NotCalibrated,

    #[error("json: {0}")]
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
