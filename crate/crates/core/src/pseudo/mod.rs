//! The pseudo-bid action space.
//!
//! A grid bid profile is represented as a path through a layered DAG of
//! binary events: "bid `k` is at level `j`" and "the gap between bids `k` and
//! `k + 1` covers level `j`". Each path corresponds to exactly one profile, and
//! the LAB utility of a profile splits into per-node sub-utilities of which
//! at most one is nonzero.

mod codec;
mod firing;
mod graph;
mod node;

use thiserror::Error;

pub use codec::{decode, encode};
pub use firing::{
    firing_node, firing_nodes, firing_price, node_fires, observed, observed_set_membership,
    path_utility, sub_utility, AdversaryInfo, RevealedBids,
};
pub use graph::{build_graph, PseudoGraph, DEFAULT_PATH_CAP};
pub use node::{PseudoNode, PseudoPath};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PseudoError {
    #[error("expected {expected} bids, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("bid {value} at position {index} is not on the grid")]
    OffGrid { index: usize, value: f64 },
    #[error("malformed path: {reason}")]
    MalformedPath { reason: &'static str },
    #[error("{count} paths exceed the enumeration cap of {cap}")]
    TooLarge { count: u64, cap: u64 },
}
