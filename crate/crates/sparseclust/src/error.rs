use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("vertex id {id} out of range for a graph on {n} vertices")]
    VertexOutOfRange { id: usize, n: usize },

    #[error("degenerate set: {0}")]
    DegenerateSet(String),

    #[error("vertex {0} has zero degree")]
    ZeroDegree(usize),

    #[error("{what}: size {n} exceeds the supported limit {limit}")]
    SizeRefused {
        what: &'static str,
        n: usize,
        limit: usize,
    },

    #[error("{what} did not converge after {iterations} iterations (best residual {residual:.3e})")]
    Convergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("chain verification failed at level {level}: {detail}")]
    Chain { level: usize, detail: String },

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
