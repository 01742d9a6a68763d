//! Which node of a path is credited with the auction outcome, and what it
//! earns.
//!
//! Against adversary bids `β_1 ≥ … ≥ β_K` (padded with `β_0 = 2` and
//! `β_{K+1} = −1`), the bid node of unit `k` at value `b` fires when
//! `β_{K−k} > b > β_{K−k+1}`: the learner wins `k` units at its own bid. The
//! gap node between units `k` and `k + 1` at level `j` fires when
//! `value(j) < β_{K−k} < value(j + 1)`: the learner wins `k` units at the
//! adversary's bid. Neither condition depends on the rest of the path.

use super::graph::PseudoGraph;
use super::node::{PseudoNode, PseudoPath};
use crate::auction::{AuctionOutcome, BidProfile, Valuation};
use crate::grid::Grid;

const TOP_SENTINEL: f64 = 2.0;
const BOTTOM_SENTINEL: f64 = -1.0;

/// What the learner knows about the adversary's ranked bids.
pub trait AdversaryInfo {
    fn units(&self) -> usize;

    /// `β_i` for `1 ≤ i ≤ K`, with the sentinels at `0` and `K + 1`; `None`
    /// if that bid was not revealed.
    fn rank(&self, i: usize) -> Option<f64>;

    /// Whether `β_i > value`, when that can be decided.
    fn exceeds(&self, i: usize, value: f64) -> Option<bool> {
        self.rank(i).map(|b| b > value)
    }
}

impl AdversaryInfo for BidProfile {
    fn units(&self) -> usize {
        BidProfile::units(self)
    }

    fn rank(&self, i: usize) -> Option<f64> {
        Some(if i == 0 {
            TOP_SENTINEL
        } else if i > BidProfile::units(self) {
            BOTTOM_SENTINEL
        } else {
            self.bid(i)
        })
    }
}

/// The adversary's winning bids after an auction the learner took
/// `allocation` units of at `price`.
///
/// Only `β_1 … β_{K−x}` are known. Every other adversary bid lies below the
/// price, which settles comparisons against values at or above it.
#[derive(Debug, Clone, Copy)]
pub struct RevealedBids<'a> {
    pub winning: &'a [f64],
    pub allocation: usize,
    pub price: f64,
}

impl AdversaryInfo for RevealedBids<'_> {
    fn units(&self) -> usize {
        self.winning.len() + self.allocation
    }

    fn rank(&self, i: usize) -> Option<f64> {
        if i == 0 {
            Some(TOP_SENTINEL)
        } else if i <= self.winning.len() {
            Some(self.winning[i - 1])
        } else if i > self.units() {
            Some(BOTTOM_SENTINEL)
        } else {
            None
        }
    }

    fn exceeds(&self, i: usize, value: f64) -> Option<bool> {
        match self.rank(i) {
            Some(b) => Some(b > value),
            None if value >= self.price => Some(false),
            None => None,
        }
    }
}

/// Price at which `node` fires, `None` if it does not fire; the outer
/// `Option` is `None` when `info` cannot decide.
pub fn firing_price<A: AdversaryInfo + ?Sized>(
    node: PseudoNode,
    info: &A,
    grid: &Grid,
) -> Option<Option<f64>> {
    let units = info.units();
    let k = node.unit() as usize;
    let above = units - k;
    if node.is_bid() {
        let b = grid.value(node.j);
        if !info.exceeds(above, b)? {
            return Some(None);
        }
        let below_is_lower = !info.exceeds(above + 1, b)?;
        Some(below_is_lower.then_some(b))
    } else {
        let beta = info.rank(above)?;
        let fires = grid.value(node.j) < beta && beta < grid.value(node.j + 1);
        Some(fires.then_some(beta))
    }
}

/// Firing indicator and price against a full adversary profile.
pub fn node_fires(node: PseudoNode, adversary: &BidProfile, grid: &Grid) -> Option<f64> {
    firing_price(node, adversary, grid).expect("a full profile decides every node")
}

/// Utility credited to `node`: zero unless it fires, then the utility of
/// winning its unit count at its price.
pub fn sub_utility(
    node: PseudoNode,
    adversary: &BidProfile,
    values: &Valuation,
    grid: &Grid,
) -> f64 {
    match node_fires(node, adversary, grid) {
        Some(price) => values.utility(node.unit() as usize, price),
        None => 0.0,
    }
}

/// Sum of sub-utilities along a path.
pub fn path_utility(
    path: &PseudoPath,
    adversary: &BidProfile,
    values: &Valuation,
    grid: &Grid,
) -> f64 {
    path.nodes()
        .iter()
        .fold(0.0, |acc, &n| acc + sub_utility(n, adversary, values, grid))
}

/// The node on `path` whose event is realized, absent when nothing is won.
pub fn firing_node(path: &PseudoPath, adversary: &BidProfile, grid: &Grid) -> Option<PseudoNode> {
    path.nodes()
        .iter()
        .copied()
        .find(|&n| node_fires(n, adversary, grid).is_some())
}

/// Whether all-winner feedback about an outcome of `allocation` units at
/// `price` reveals the sub-utility of `node`.
pub fn observed(node: PseudoNode, allocation: usize, price: f64, grid: &Grid) -> bool {
    let k = node.unit() as usize;
    if node.is_gap() {
        k >= allocation
    } else {
        k > allocation || (k == allocation && grid.value(node.j) >= price)
    }
}

/// [`observed`] for a cleared auction.
pub fn observed_set_membership(node: PseudoNode, outcome: &AuctionOutcome, grid: &Grid) -> bool {
    observed(node, outcome.allocation, outcome.price, grid)
}

/// Every node of the graph that fires against `adversary`, with its price.
pub fn firing_nodes(graph: &PseudoGraph, adversary: &BidProfile) -> Vec<(usize, f64)> {
    (0..graph.node_count())
        .filter_map(|i| node_fires(graph.node(i), adversary, graph.grid()).map(|p| (i, p)))
        .collect()
}
