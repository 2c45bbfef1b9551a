use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("pair index {0} is outside 0..=7")]
    PairIndexOutOfRange(usize),
    #[error("invalid clone parameters: fidelity {fidelity}, success {success}")]
    InvalidCloneParams { fidelity: f64, success: f64 },
    #[error("invalid encoding spec: {0}")]
    InvalidSpec(String),
    #[error("pair {index} out of range for a token of {len} pairs")]
    PairOutOfRange { index: usize, len: usize },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("serial mismatch: expected {expected:?}, got {got:?}")]
    SerialMismatch { expected: String, got: String },
    #[error("unknown serial {0:?}")]
    UnknownSerial(String),
    #[error("serial {0:?} already issued")]
    DuplicateSerial(String),
    #[error("serial {0:?} already spent")]
    AlreadySpent(String),
    #[error("invalid thresholds: {0}")]
    InvalidThresholds(String),
    #[error("fidelity grid is empty")]
    EmptyGrid,
    #[error("grid value {0} outside [0.5, 1]")]
    GridOutOfRange(f64),
    #[error("candidate space is empty")]
    EmptyCandidateSpace,
    #[error("invalid recovery settings: {0}")]
    InvalidSettings(String),
    #[error("recovery did not identify a secret")]
    NotRecovered,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
