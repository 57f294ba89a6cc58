use thiserror::Error;

use crate::hmm::Violation;

/// Errors raised by the estimation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A numeric input lies outside the domain of the operation (NaN, infinity, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter violates a documented precondition.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error(
        "degenerate configuration: lower threshold {lower} is not below upper threshold {upper}"
    )]
    DegenerateThresholds { lower: f64, upper: f64 },

    #[error("observation at step {step} is impossible under every state")]
    InfeasibleObservation { step: usize },

    #[error("sequence length {len} exceeds the exhaustive-search limit of {max}")]
    SizeGuard { len: usize, max: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    /// The chain is not irreducible and aperiodic, or power iteration did not settle.
    #[error("structural error: {0}")]
    Structural(String),

    #[error("model validation failed: {0}")]
    Invalid(#[from] Violation),
}

pub type Result<T> = std::result::Result<T, Error>;
