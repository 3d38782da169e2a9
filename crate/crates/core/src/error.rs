use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid power allocation: {0}")]
    InvalidAllocation(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("length mismatch: expected {expected} entries, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("fairness index undefined: all rates are zero")]
    AllRatesZero,

    #[error("grid search supports at most {max} users, got {actual}")]
    TooManyUsers { max: usize, actual: usize },

    #[error("convergence trace too short: need at least {needed} usable entries, got {actual}")]
    InsufficientTrace { needed: usize, actual: usize },

    #[error("malformed scenario document: {0}")]
    Parse(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by bad input rather than the environment.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io { .. } | Error::Csv(_))
    }
}
