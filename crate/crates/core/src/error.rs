use thiserror::Error;

use crate::mdp::ValidationReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid MDP: {0}")]
    InvalidMdp(ValidationReport),

    #[error("invalid controller: {0}")]
    InvalidController(String),

    #[error("linear system is numerically singular (pivot magnitude {pivot:e})")]
    Singular { pivot: f64 },

    #[error("action index {index} out of range for {k} actions")]
    ActionOutOfRange { index: usize, k: usize },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("graph is not cubic: vertex {vertex} has degree {degree}")]
    NotCubic { vertex: usize, degree: usize },

    #[error("target size j = {j} out of range 1..={n}")]
    TargetOutOfRange { j: usize, n: usize },

    #[error("discount factor {0} is not in (0, 1)")]
    Discount(String),

    #[error("sum of c is {sum}, which is at most 1: instance is trivial, decide it directly")]
    TrivialSqrtSum { sum: String },

    #[error("exact search budget exceeded: {n} vertices (limit {limit})")]
    SearchBudget { n: usize, limit: usize },

    #[error("instance is not in the tractable class: {0}")]
    NotTractable(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
