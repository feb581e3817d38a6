use thiserror::Error;

/// Errors raised by the numerical core.
///
/// Numerical failures that are part of normal operation (an unsolvable Newton
/// step, an ill-conditioned path) are reported in-band by the relevant result
/// types; this enum covers malformed input and violated preconditions.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("the zero vector has no projective class")]
    ZeroVector,

    #[error("bound void: D^(1/2) * dist * mu = {0} is not below 1")]
    BoundVoid(f64),

    #[error("u = {0} is outside [0, (3 - sqrt 7)/4)")]
    Domain(f64),

    #[error("condition number is infinite")]
    InfiniteCondition,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("track result is not a success: {0}")]
    TrackNotSuccessful(String),
}

pub type Result<T> = std::result::Result<T, Error>;
