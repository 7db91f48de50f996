use thiserror::Error;

use crate::graph::{EdgeMark, TimedNode};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("node {node} out of range (graph has {size} nodes)")]
    NodeOutOfRange { node: usize, size: usize },

    #[error("{0} and {1} are not adjacent")]
    NotAnEdge(TimedNode, TimedNode),

    #[error("cannot place {mark:?} at {at}: it is the later endpoint of a temporal edge and must stay a head")]
    FixedMark { at: TimedNode, mark: EdgeMark },

    #[error("adding edge {0} -> {1} would create a directed cycle")]
    Cycle(usize, usize),

    #[error("invalid MAG: {0}")]
    InvalidMag(String),

    #[error("insufficient samples: {samples} rows for a test with {cond} conditioning variables")]
    InsufficientSamples { samples: usize, cond: usize },

    #[error("series of length {len} is too short for window {window}")]
    SeriesTooShort { len: usize, window: usize },

    #[error("type mismatch: {0}")]
    TypeMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no stationary coefficients found after {0} attempts")]
    NotStationary(usize),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
