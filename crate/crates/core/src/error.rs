use thiserror::Error;

use crate::forest::Node;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid size: {0}")]
    InvalidSize(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("node {node} out of range for n = {n}")]
    NodeOutOfRange { node: Node, n: usize },
    #[error("process {proc} has no queued work at step {step}")]
    ScheduleExhausted { proc: usize, step: u64 },
    #[error("process {proc} does not exist (p = {procs}) at step {step}")]
    UnknownProcess { proc: usize, procs: usize, step: u64 },
    #[error("invariant violated at step {step}: {what}")]
    Invariant { step: u64, what: String },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}
