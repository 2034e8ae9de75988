use thiserror::Error;

/// Errors raised by the estimators and experiment drivers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    /// The needle never crossed a line, so 2ln/(am) is undefined.
    #[error("no crossings observed in {throws} throws; the pi estimate is undefined")]
    NoCrossings { throws: u64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("no intersections between the segment sets; the area estimate is undefined")]
    NoIntersections,

    #[error("arithmetic overflow: {0}")]
    Overflow(String),
}

impl Error {
    /// True for failures caused by the sample itself rather than by the caller's
    /// configuration (too few crossings, runs or intersections).
    pub fn is_degenerate(&self) -> bool {
        matches!(
            self,
            Error::NoCrossings { .. } | Error::InsufficientData(_) | Error::NoIntersections
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
