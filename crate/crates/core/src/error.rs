use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid gluing: {0}")]
    Gluing(String),

    #[error("shape mismatch: expected {expected} entries, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("quadrature did not converge: value {value:e}, error estimate {error:e} after {intervals} intervals")]
    Quadrature {
        value: f64,
        error: f64,
        intervals: usize,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("linear program failed: {0}")]
    LinearProgram(String),

    #[error("target cone angles are not positively feasible ({0})")]
    NotPositiveFeasible(String),

    #[error("maximum iterations ({iterations}) reached; gradient residual {residual:e}")]
    MaxIterations { iterations: usize, residual: f64 },

    #[error("line search failed at iteration {iteration}; gradient residual {residual:e}")]
    LineSearchFailure { iteration: usize, residual: f64 },

    #[error("unsupported evaluation: {0}")]
    Unsupported(String),

    #[error("solver requires a closed triangulation")]
    NotClosed,

    #[error("inconsistent maximizer: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, Error>;
