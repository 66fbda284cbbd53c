use thiserror::Error;

/// Errors produced across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A degree profile that cannot be realized (fractions, edge counts).
    #[error("profile error: {0}")]
    Profile(String),

    /// A matrix or graph violating a structural invariant.
    #[error("structural error: {0}")]
    Structural(String),

    /// Malformed alist (or other text) input.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// An argument outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Subgraph expansion stopped before every check was covered.
    #[error("expansion incomplete after {subgraphs} subgraphs; uncovered checks: {uncovered:?}")]
    Coverage {
        subgraphs: usize,
        uncovered: Vec<usize>,
    },

    /// Inconsistent configuration (bad flags, artifact/code mismatch).
    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
