//! Crate-wide error type.

use crate::topology::NodeId;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A node cannot reach the sink under the active link predicate.
    #[error("topology error: node {node} is disconnected from the sink")]
    Disconnected { node: NodeId },

    #[error("topology error: {0}")]
    Topology(String),

    #[error("schedule error: {0}")]
    Schedule(String),

    #[error("validation error: {0}")]
    Validation(String),

    /// A local matrix required to be invertible is numerically singular.
    #[error("invertibility error: local matrix at node {node} is singular (|det| = {det:.3e})")]
    Singular { node: NodeId, det: f64 },

    #[error("parity violation: {0}")]
    Parity(String),

    #[error("level plan error: {0}")]
    Plan(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("accounting error: {0}")]
    Accounting(String),

    #[error("undefined signal: {0}")]
    UndefinedSignal(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
