use thiserror::Error;

/// Errors raised by the model, pricing, and oracle routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameters: {}", .0.join(", "))]
    InvalidParams(Vec<String>),

    #[error("{what} must be non-negative, got {value}")]
    NegativeTime { what: &'static str, value: f64 },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("payment index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("root finder did not converge after {iterations} iterations (target {target})")]
    NoConvergence { iterations: usize, target: f64 },

    #[error("quadrature budget exhausted: estimate {estimate}, error bound {error}")]
    QuadratureBudget { estimate: f64, error: f64 },

    #[error("evaluation point ({t1}, {t2}) lies within {min_gap} of the diagonal")]
    NearDiagonal { t1: f64, t2: f64, min_gap: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
