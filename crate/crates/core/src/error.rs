//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("corpus is empty after tokenization")]
    EmptyCorpus,

    #[error("corpus has {got} tokens but order {order} needs at least {need}")]
    CorpusTooShort {
        got: usize,
        order: usize,
        need: usize,
    },

    #[error("token {token:?} is not in the vocabulary")]
    UnknownToken { token: String },

    #[error("vector length {got} does not match vocabulary size {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("{detector} detector needs at least {need} scored tokens, got {got}")]
    TooShortForDetection {
        detector: &'static str,
        need: usize,
        got: usize,
    },

    #[error("k-means asked for {clusters} clusters but only {points} points given")]
    TooFewPoints { clusters: usize, points: usize },

    #[error("cannot place {segments} segments: {reason}")]
    HostingImpossible { segments: usize, reason: String },

    #[error("metric needs both classes present: {0}")]
    SingleClass(&'static str),

    #[error("natural corpus too short: need {need} tokens, have {got}")]
    InsufficientNatural { need: usize, got: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("model file error: {0}")]
    ModelFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
