use thiserror::Error;

/// Errors produced anywhere in the detection pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("incompatible codes: width {left} vs {right}")]
    WidthMismatch { left: u32, right: u32 },

    #[error("bit index {index} out of range for width {width}")]
    IndexOutOfRange { index: u32, width: u32 },

    #[error("duplicate bit index {0}")]
    DuplicateIndex(u32),

    #[error("union of an empty list of codes")]
    EmptyUnion,

    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: &'static str, message: String },

    #[error("bad record: {0}")]
    BadRecord(String),

    #[error("bad timestamp `{0}`")]
    BadTimestamp(String),

    #[error("non-monotonic timestamp at row {row}: {timestamp}")]
    NonMonotonic { row: usize, timestamp: String },

    #[error("non-finite anomaly score {0}")]
    NonFiniteScore(f64),

    #[error("at least one model is required")]
    NoModels,

    #[error("streams share no common time range")]
    NoOverlap,

    #[error("unsorted detections")]
    UnsortedDetections,

    #[error("bad labels: {0}")]
    BadLabels(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, message: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        message: message.into(),
    }
}
