use thiserror::Error;

use crate::clients::ClientError;

/// Pipeline-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("missing directory: {0}")]
    MissingDirectory(String),
    #[error("no frames")]
    NoFrames,
    #[error("malformed ppm: {0}")]
    MalformedPpm(String),
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("histogram bin layout mismatch")]
    BinLayoutMismatch,
    #[error("invalid thresholds: {0}")]
    InvalidThresholds(String),
    #[error("client error: {0}")]
    Client(#[from] ClientError),
    #[error("routing error: {0}")]
    Routing(String),
    #[error("fusion error: {0}")]
    Fusion(String),
    #[error("zero variance in correlation input")]
    ZeroVariance,
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
