use std::io;

use thiserror::Error;

/// Errors raised by the numerical core, the extractor and the stream engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("empty batch")]
    EmptyBatch,
    #[error("empty data set")]
    EmptyData,
    #[error("weights diverged after update {iteration} (learning rate too large?)")]
    Divergence { iteration: u64 },
    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparams(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("example {index} has no ground-truth label")]
    Unlabeled { index: usize },
    #[error("only one class present; both normal and attack examples are required")]
    SingleClass,
    #[error("not enough records for pretraining: need {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("grid of {points} points exceeds the limit of {limit}")]
    GridTooLarge { points: u128, limit: u128 },
    #[error("capture: {0}")]
    Capture(#[from] crate::features::pcap::CaptureError),
    #[error("label file: {0}")]
    LabelFile(String),
    #[error("feature csv: {0}")]
    FeatureCsv(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
