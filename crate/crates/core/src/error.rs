use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid range: {0}")]
    InvalidRange(String),
    #[error("invalid strategy row {row}: {reason}")]
    InvalidStrategy { row: usize, reason: String },
    #[error("game length {0} exceeds the supported maximum of {max}", max = crate::N_MAX_CAP)]
    TooLong(usize),
    #[error("invalid game state: {0}")]
    InvalidState(String),
    #[error("raw draw {0} is outside 0..=999")]
    DrawOutOfRange(i64),
    #[error("size mismatch: {values} values for {bounds} intervals")]
    SizeMismatch { values: usize, bounds: usize },
    #[error("no losing games recorded; mean elimination turn is undefined")]
    NoLosses,
    #[error("placement rejected: {0}")]
    Infeasible(String),
}

pub type Result<T> = std::result::Result<T, Error>;
