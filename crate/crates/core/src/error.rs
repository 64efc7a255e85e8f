use thiserror::Error;

use crate::network::AgentId;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OscError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quantity {q} exceeds capacity {q_max}")]
    CapacityExceeded { q: f64, q_max: f64 },

    #[error("objective is not concave on [0, {q_max}]: second difference {second_diff:.3e} at q = {at:.4}")]
    NonConcave { q_max: f64, at: f64, second_diff: f64 },

    #[error("agent {0} does not exist in the network")]
    UnknownAgent(AgentId),

    #[error("invalid configuration: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),

    #[error("state space of {states} configurations exceeds cap {cap}")]
    StateSpaceTooLarge { states: usize, cap: usize },

    #[error("Markov chain is not ergodic: {0}")]
    NotErgodic(String),

    #[error("power iteration did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("improvement dynamics failed to terminate: {0}")]
    Oscillation(String),

    #[error("invariant violated in period {period}: {detail}")]
    InvariantBreach { period: usize, detail: String },

    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for OscError {
    fn from(e: std::io::Error) -> Self {
        OscError::Io(e.to_string())
    }
}

impl From<csv::Error> for OscError {
    fn from(e: csv::Error) -> Self {
        OscError::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for OscError {
    fn from(e: serde_json::Error) -> Self {
        OscError::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, OscError>;
