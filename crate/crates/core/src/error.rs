use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unreadable file {path}: {reason}")]
    UnreadableFile { path: PathBuf, reason: String },

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("zero-dimension image")]
    ZeroDimension,

    #[error("invalid image data: {0}")]
    InvalidImage(String),

    #[error("pyramid level {level} too large for a {width}x{height} image")]
    LevelTooLarge {
        level: u32,
        width: usize,
        height: usize,
    },

    #[error("image too small: {0}")]
    ImageTooSmall(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-invertible transform")]
    NonInvertible,

    #[error("insufficient correspondences: need at least {needed}, got {got}")]
    InsufficientCorrespondences { needed: usize, got: usize },

    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),

    #[error("ransac failed: no consensus set of size >= 3")]
    RansacFailed,

    #[error("correspondence set too large for the brute-force oracle: {0} > {max}", max = crate::gor::ORACLE_MAX_N)]
    OracleTooLarge(usize),

    #[error("survivor pair {0} is absent from the initial set")]
    SurvivorNotInInitial(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown outlier filter {0:?}")]
    UnknownFilter(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
