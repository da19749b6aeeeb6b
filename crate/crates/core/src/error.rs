use thiserror::Error;

/// Failure while reading an edge list.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    /// 1-based line number; 0 when the error is not tied to a line.
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("expected 2 or 3 fields, found {0}")]
    FieldCount(usize),
    #[error("invalid weight `{0}`")]
    InvalidWeight(String),
    #[error("weight must be positive and finite, got {0}")]
    NonPositiveWeight(f64),
    #[error("input contains no nodes")]
    Empty,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("node index {index} out of range for a graph with {node_count} nodes")]
    NodeOutOfRange { index: usize, node_count: usize },
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("random walk did not converge after {steps} steps (residual transient mass {residual:e})")]
    NonConvergence { steps: usize, residual: f64 },
    #[error("statistics: {0}")]
    Statistics(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
