use thiserror::Error;

/// Errors produced by the bound, coding and harness routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid distribution: {0}")]
    InvalidPmf(String),

    #[error(
        "dimension mismatch: source has {source_len} labels, distortion matrix is {rows}x{cols}"
    )]
    DimensionMismatch {
        source_len: usize,
        rows: usize,
        cols: usize,
    },

    #[error("invalid distortion matrix: {0}")]
    InvalidDistortion(String),

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("block alphabet of {size} tuples exceeds the limit of {limit}")]
    AlphabetTooLarge { size: String, limit: u64 },

    #[error("{path}:{line}: {msg}")]
    Load {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("invalid series: {0}")]
    InvalidSeries(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
