use thiserror::Error;

/// Errors raised by the graph, kernel, proximal and solver routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DenoiseError {
    #[error("invalid size: {0}")]
    InvalidSize(String),

    #[error("index {index} out of range for {len} vertices")]
    Index { index: usize, len: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("non-finite or malformed data: {0}")]
    Data(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("topology error: {0}")]
    Topology(String),

    #[error("{path}: {message}")]
    Io { path: String, message: String },

    #[error("TV proximal solver did not converge after {iterations} iterations (gap {gap:.3e})")]
    NonConvergence { iterations: usize, gap: f64 },
}

pub type Result<T> = std::result::Result<T, DenoiseError>;
