use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph parameters: {0}")]
    InvalidGraph(String),
    #[error("pairing failed after {0} restarts")]
    PairingFailed(usize),
    #[error("size mismatch: expected {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("invalid protocol: {0}")]
    InvalidProtocol(String),
    #[error("tau {tau} outside 1..={m}")]
    TauOutOfRange { tau: usize, m: usize },
    #[error("degenerate statistics: {0}")]
    Degenerate(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("no crossing found in the common range")]
    NoCrossing,
    #[error("system too large for exact treatment: n = {n}, cap = {cap}")]
    SizeCap { n: usize, cap: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("inconsistent state: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
