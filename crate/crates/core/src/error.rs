use std::io;

use thiserror::Error;

/// Errors produced by the PAC toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("block length {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("message length {k} out of range for block length {n}")]
    MessageLength { k: usize, n: usize },
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("invalid bit value {0} (expected 0 or 1)")]
    InvalidBit(u8),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid code specification: {0}")]
    InvalidCode(String),
    #[error("quadrature did not converge (last relative change {0:e})")]
    Quadrature(f64),
    #[error("demapper depth {depth} out of bounds for block length {n}")]
    DepthOutOfBounds { depth: usize, n: usize },
    #[error("bound precondition violated: {0}")]
    BoundCondition(String),
    #[error("malformed cache file: {0}")]
    Cache(String),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_power_of_two(n: usize) -> Result<()> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    Ok(())
}
