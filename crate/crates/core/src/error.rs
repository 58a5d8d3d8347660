use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("invalid function specification: {0}")]
    InvalidSpec(String),

    #[error("function could not be evaluated: {0}")]
    Evaluation(String),

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("value {value} outside the range (0, {upper}] of Q0")]
    OutOfRange { value: f64, upper: f64 },

    #[error("Q0 kernel is degenerate: no positive initial coefficient")]
    DegenerateKernel,

    #[error("coefficient error: {0}")]
    Coefficient(String),

    #[error("flux data inconsistent with the model at node {node} (t = {t}): {reason}")]
    DataInconsistent { node: usize, t: f64, reason: String },

    #[error("assumption violated: {0}")]
    AssumptionViolated(String),

    #[error("fixed point not converged after {iterations} iterations (last update {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("finite-difference oracle failed: {0}")]
    OracleFailure(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),
}
