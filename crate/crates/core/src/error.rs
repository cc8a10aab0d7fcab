use thiserror::Error;

/// Finite and strictly positive (rejects NaN and infinities).
pub(crate) fn finite_pos(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

/// Finite and non-negative (rejects NaN and infinities).
pub(crate) fn finite_nonneg(x: f64) -> bool {
    x.is_finite() && x >= 0.0
}

/// Errors produced by model construction and simulation stepping.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid motor spec: {0}")]
    InvalidMotorSpec(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("time step must be positive, got {0}")]
    InvalidTimestep(f64),

    #[error("unknown parameter key `{0}`")]
    UnknownKey(String),

    #[error("invalid value for `{key}`: {reason}")]
    InvalidValue { key: String, reason: String },
}
