use alloc::string::String;

use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unknown node {0}")]
    UnknownNode(u32),
    #[error("unknown node label `{0}`")]
    UnknownLabel(String),
    #[error("edge weight must be positive and finite, got {0}")]
    InvalidWeight(f64),
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("community assignment covers {found} nodes, graph has {expected}")]
    AssignmentMismatch { expected: usize, found: usize },
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: &'static str },
    #[error("node pair must have distinct endpoints")]
    SelfPair,
    #[error("score is NaN")]
    NanScore,
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("labels contain a single class")]
    SingleClass,
    #[error("could only sample {found} of {needed} negative pairs")]
    NegativeSamplingExhausted { needed: usize, found: usize },
    #[error("second snapshot adds no new edges")]
    NoNewEdges,
    #[error("unknown token `{0}`")]
    UnknownToken(String),
    #[error("every document is empty after vocabulary filtering")]
    EmptyDocuments,
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: &'static str) -> Self {
        Error::InvalidParameter { name, reason }
    }
}
