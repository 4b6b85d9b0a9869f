use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("weight sum overflows 64 bits")]
    WeightOverflow,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// The SAT oracle ran out of its conflict budget; the answer is unknown.
    #[error("resource limit exceeded after {conflicts} conflicts")]
    ResourceLimit { conflicts: u64 },
    #[error("instance exceeds the brute-force cap: {0}")]
    CapExceeded(String),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
