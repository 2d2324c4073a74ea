use thiserror::Error;

/// Errors raised by the voting and apportionment engines.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("value {0} does not fit in the target scalar type")]
    Overflow(String),
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("dimension mismatch: expected {expected} candidates, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("profile has {available} rounds but {needed} were requested")]
    ProfileTooShort { needed: u64, available: u64 },
    #[error("normalized scores sum to {0}, expected exactly 1")]
    NotNormalized(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("no repeated state within {cap} rounds")]
    CycleCapExceeded { cap: u64 },
    /// A proven invariant failed at runtime. Always a bug.
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    /// Process exit code used by the command line: 1 for user errors, 2 for
    /// invariant breaches.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Invariant(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
