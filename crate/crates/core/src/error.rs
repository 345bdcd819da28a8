use num_bigint::BigUint;
use thiserror::Error;

/// Errors raised across the toolkit.
///
/// Verification failures are not errors; they are reported as report
/// content. Variants here signal bad input, exhausted resources, or a
/// broken internal invariant.
#[derive(Debug, Error)]
pub enum Error {
    #[error("ambient dimension {n} exceeds the supported maximum {max}")]
    DimensionTooLarge { n: usize, max: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid bit string {0:?}")]
    InvalidBitString(String),

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("Grassmannian has {required} elements, which exceeds the cap of {cap}")]
    CapExceeded { required: BigUint, cap: u64 },

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("eigensolver did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("invalid {what} at {pointer}: {reason}")]
    InvalidStrategy {
        what: &'static str,
        pointer: String,
        reason: String,
    },

    #[error("malformed input at {pointer}: {reason}")]
    Format { pointer: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
