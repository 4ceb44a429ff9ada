use std::io;

use thiserror::Error;

/// Errors reported by `momo-core`.
///
/// Extraction procedures that run out of horizon do not use this type; they
/// return a certificate with the failing stage recorded instead.
#[derive(Debug, Error)]
pub enum Error {
    #[error("table of size {requested} needs {bytes} bytes, over the {budget} byte budget")]
    Capacity { requested: u64, bytes: u64, budget: u64 },

    #[error("argument {value} outside the valid range [{min}, {max}]")]
    Range { value: u64, min: u64, max: u64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("cache format: {0}")]
    CacheFormat(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_range(value: u64, min: u64, max: u64) -> Result<()> {
    if value < min || value > max {
        Err(Error::Range { value, min, max })
    } else {
        Ok(())
    }
}
