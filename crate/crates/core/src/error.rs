use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the kernel. Parse errors carry byte offsets into the
/// offending expression string.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("unbound variable: {0}")]
    Unbound(String),

    #[error("degenerate metric at q = {point:?} (|det| = {det:e})")]
    DegenerateMetric { point: Vec<f64>, det: f64 },

    #[error("metric not symmetric: g[{i}][{j}] = {gij}, g[{j}][{i}] = {gji}")]
    NonSymmetricMetric { i: usize, j: usize, gij: f64, gji: f64 },

    #[error("force not symmetric in (α,β): component i={i}, α={alpha}, β={beta}")]
    AsymmetricForce { i: usize, alpha: usize, beta: usize },

    #[error("base point mismatch")]
    BaseMismatch,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
