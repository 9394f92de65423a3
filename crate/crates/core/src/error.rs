use thiserror::Error;

/// Errors shared across the solver, analysis and harness layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {context} (expected {expected}, got {got})")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("matrix is not symmetric positive definite: nonpositive pivot at index {pivot}")]
    NotSpd { pivot: usize },

    #[error("{what} did not converge after {iterations} iterations (last estimates {last:?})")]
    NonConvergence {
        what: &'static str,
        iterations: usize,
        last: [f64; 2],
    },

    #[error("size guard: {context} would need {requested} entries (limit {limit})")]
    SizeGuard {
        context: &'static str,
        requested: usize,
        limit: usize,
    },

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("unsupported fault model for {context}: {kind}")]
    UnsupportedModel {
        context: &'static str,
        kind: &'static str,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
