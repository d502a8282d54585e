//! Link prediction primitives built around community-aware random walks.
//!
//! The crate is `no_std` (it only needs `alloc`). Everything here is a pure
//! function of its inputs and an explicit seed; file formats, threading and
//! the command line live in the companion `linkpred` crate.
//!
//! Pipeline building blocks, in the order they are normally used:
//!
//! * [`graph`]: weighted directed/undirected graphs with string node labels.
//! * [`community`]: Louvain modularity maximization.
//! * [`walker`]: the alpha-mixed neighbor / same-community random walk.
//! * [`skipgram`]: structural embeddings with an edge-weighted skip-gram.
//! * [`paragraph`]: per-node content embeddings with PV-DM (concatenation).
//! * [`features`]: node vector concatenation and the Hadamard edge operator.
//! * [`baselines`]: common neighbors and friends.
//! * [`split`], [`classifier`], [`auc`]: evaluation.
//! * [`synthetic`]: planted-partition generators used by tests and sweeps.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod auc;
pub mod baselines;
pub mod classifier;
pub mod community;
pub mod embedding;
mod error;
pub mod features;
pub mod graph;
pub mod math;
pub mod paragraph;
pub mod rng;
pub mod skipgram;
pub mod split;
pub mod synthetic;
pub mod walker;

pub use error::{Error, Result};
pub use graph::{Graph, GraphBuilder, LoadReport, NodeId};
