//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("classifier length mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid universe size {n}: {reason}")]
    InvalidUniverse { n: usize, reason: String },

    #[error("invalid context {context}: spec has {context_count} contexts")]
    InvalidContext { context: usize, context_count: usize },

    #[error("merge of an empty classifier set is undefined")]
    EmptyMerge,

    #[error("invalid oracle spec: {0}")]
    SpecInvalid(String),

    #[error("inconsistent oracle spec: {0}")]
    SpecInconsistent(String),

    #[error("enumeration budget exceeded: required {required} evaluations, budget {budget}")]
    ResourceExceeded { required: u64, budget: u64 },

    #[error("instance generation failed: {0}")]
    GenerationFailed(String),

    #[error("degenerate orbit at index {index}: no candidate available for {side}")]
    DegenerateOrbit { index: usize, side: &'static str },

    #[error("invalid metric matrix: {0}")]
    InvalidMetric(String),

    #[error("threshold stack is not monotone at level {level}, pair ({u}, {v})")]
    NonMonotoneStack { level: usize, u: usize, v: usize },

    #[error("parse error: {0}")]
    Parse(String),
}
