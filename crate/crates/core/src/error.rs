use std::io;

use thiserror::Error;

/// Errors raised anywhere in the pipeline engine.
#[derive(Debug, Error)]
pub enum LeapError {
    #[error("dimension error: {width}x{height} outside 1..=4095")]
    Dimension { width: u32, height: u32 },
    #[error("format error: {0}")]
    Format(String),
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("token pushed while the enhancement core is held in reset")]
    ResetViolation,
    #[error("framing error: {0}")]
    Framing(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("consistency error: {0}")]
    Consistency(String),
    #[error("worker failure: {0}")]
    Worker(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = LeapError> = std::result::Result<T, E>;
