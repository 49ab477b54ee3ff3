use thiserror::Error;

/// Errors produced by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shape mismatch: expected {expected} entries, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("t0 = {t0} rejected: {reason} at t = {at}")]
    InvalidT0 { t0: f64, at: f64, reason: String },

    #[error("Orlicz validation failed: {reason} at t = {at}")]
    InvalidOrlicz { at: f64, reason: String },

    #[error("integrand is not integrable at 0: {0}")]
    NonIntegrable(String),

    #[error(transparent)]
    Metric(#[from] MetricError),

    #[error("refusing exhaustive scan of {configurations} configurations (limit {limit})")]
    TooLarge { configurations: u64, limit: u64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Violations found while validating a distance table.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("distance table is empty")]
    Empty,
    #[error("row {row} has {got} entries, expected {expected}")]
    NotSquare { row: usize, got: usize, expected: usize },
    #[error("non-finite distance at ({i}, {j})")]
    NonFinite { i: usize, j: usize },
    #[error("nonzero diagonal entry at ({i}, {i})")]
    Diagonal { i: usize },
    #[error("asymmetric distances at ({i}, {j})")]
    Asymmetric { i: usize, j: usize },
    #[error("non-positive distance between distinct points ({i}, {j})")]
    NonPositive { i: usize, j: usize },
    #[error("triangle inequality fails: d({i},{k}) > d({i},{j}) + d({j},{k})")]
    Triangle { i: usize, j: usize, k: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
