use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the decoding pipeline.
#[derive(Debug, Error)]
pub enum AadError {
    #[error("invalid filter spec: {0}")]
    InvalidSpec(String),

    #[error("signal too short: need more than {required} samples, got {actual}")]
    Length { required: usize, actual: usize },

    #[error("unsupported resampling ratio {from} Hz -> {to} Hz")]
    UnsupportedRatio { from: f64, to: f64 },

    #[error("common average reference needs at least 2 channels, got {0}")]
    DegenerateReference(usize),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("normal equations are rank deficient; use a positive lambda")]
    RankDeficient,

    #[error("every lambda produced an undefined score (constant target?)")]
    DegenerateTarget,

    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error("window [{start}, {end}) exceeds signal of {len} samples")]
    Range { start: usize, end: usize, len: usize },

    #[error("correlation undefined: {0} input is constant")]
    UndefinedCorrelation(&'static str),

    #[error("layout references unknown channels: {}", .0.join(", "))]
    Layout(Vec<String>),

    #[error("format error in {path}: {msg}")]
    Format { path: PathBuf, msg: String },

    #[error("non-finite value at row {row}, column {col}")]
    Data { row: usize, col: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid counts: {0}")]
    InvalidCounts(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl AadError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AadError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, msg: impl Into<String>) -> Self {
        AadError::Format {
            path: path.into(),
            msg: msg.into(),
        }
    }

    /// True for errors caused by malformed data files rather than bad configuration.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            AadError::Format { .. } | AadError::Data { .. }
        )
    }
}

pub type Result<T, E = AadError> = std::result::Result<T, E>;
