use thiserror::Error;

/// Errors produced by the ideofactor library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("negative weight {weight} on edge {src} -> {dst}")]
    NegativeWeight { src: String, dst: String, weight: f64 },

    #[error("unknown id `{0}` (not in the declared universe)")]
    UnknownId(String),

    #[error("matrix is not symmetric (max |x_ij - x_ji| = {max_asymmetry:e})")]
    NotSymmetric { max_asymmetry: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite value in {factor} at iteration {iteration}")]
    NumericAbort { factor: &'static str, iteration: usize },

    #[error("negative latent component ({0})")]
    NegativeComponent(f64),

    #[error("series overlap too small: {found} common ids, need at least 2")]
    InsufficientOverlap { found: usize },

    #[error("zero variance in {which} series over the common ids")]
    ZeroVariance { which: &'static str },

    #[error("cannot place user: {0}")]
    Unplaceable(String),

    #[error("{path}: {message}")]
    Io { path: String, message: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
