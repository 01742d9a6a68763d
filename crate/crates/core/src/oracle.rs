//! Brute-force references for small instances.
//!
//! Everything here enumerates paths explicitly and shares no arithmetic with
//! the forward/backward machinery it is used to check, except where noted.

use thiserror::Error;

use crate::auction::{clear_auction, AuctionError, BidProfile, PricingRule, Valuation};
use crate::learner::{
    log_sum_exp, signal_from_view, FeedbackMode, FeedbackView, SignalError, WeightState,
};
use crate::pseudo::{
    decode, node_fires, observed, PseudoError, PseudoGraph, PseudoNode, PseudoPath,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error(transparent)]
    Pseudo(#[from] PseudoError),
    #[error(transparent)]
    Auction(#[from] AuctionError),
    #[error(transparent)]
    Signal(#[from] SignalError),
}

/// Best fixed path over a history by trying every path. Per-round utilities
/// are summed in round order; ties go to the lexicographically smallest path.
pub fn best_fixed_action_exhaustive(
    history: &[BidProfile],
    graph: &PseudoGraph,
    values: &Valuation,
    cap: u64,
) -> Result<(PseudoPath, f64), OracleError> {
    let mut best: Option<(PseudoPath, f64)> = None;
    for path in graph.enumerate_paths(cap)? {
        let bids = decode(graph, &path)?;
        let mut total = 0.0;
        for beta in history {
            total += clear_auction(&bids, beta, PricingRule::Lab, values)?.utility;
        }
        if best.as_ref().is_none_or(|(_, b)| total > *b) {
            best = Some((path, total));
        }
    }
    Ok(best.expect("every graph has at least one path"))
}

/// Maximum-weight path when each node carries a fixed total.
///
/// Ties prefer the smaller next node, which yields the lexicographically
/// smallest optimal path.
pub fn best_fixed_action_dp(node_totals: &[f64], graph: &PseudoGraph) -> (PseudoPath, f64) {
    let n = graph.node_count();
    assert_eq!(node_totals.len(), n, "one total per node");
    let mut best = vec![0.0; n];
    let mut next: Vec<Option<usize>> = vec![None; n];
    for &idx in graph.topological().iter().rev() {
        let mut choice: Option<(usize, f64)> = None;
        // Successor lists are sorted by node, so strict improvement keeps the
        // smallest node among ties.
        for &s in graph.successors(idx) {
            if choice.is_none_or(|(_, v)| best[s] > v) {
                choice = Some((s, best[s]));
            }
        }
        best[idx] = node_totals[idx] + choice.map_or(0.0, |(_, v)| v);
        next[idx] = choice.map(|(s, _)| s);
    }
    let mut start = graph.starts()[0];
    for &s in graph.starts() {
        if best[s] > best[start] {
            start = s;
        }
    }
    let mut nodes = vec![graph.node(start)];
    let mut cur = start;
    while let Some(s) = next[cur] {
        nodes.push(graph.node(s));
        cur = s;
    }
    (PseudoPath::new(nodes), best[start])
}

/// Probability of every path under the current weights, from the products
/// of node weights.
pub fn exact_path_distribution(
    state: &WeightState,
    graph: &PseudoGraph,
    cap: u64,
) -> Result<Vec<(PseudoPath, f64)>, OracleError> {
    let paths = graph.enumerate_paths(cap)?;
    let log_weights: Vec<f64> = paths
        .iter()
        .map(|p| {
            p.nodes()
                .iter()
                .map(|&n| state.log_weight(graph.index_of(n).expect("node in graph")))
                .sum()
        })
        .collect();
    let log_total = log_sum_exp(log_weights.iter().copied());
    Ok(paths
        .into_iter()
        .zip(log_weights)
        .map(|(p, lw)| (p, (lw - log_total).exp()))
        .collect())
}

/// Exact moments of the estimated path utilities over the learner's draw.
#[derive(Debug, Clone)]
pub struct EstimatorMoments {
    /// Path, its probability, its true utility and the expectation of its
    /// estimated utility.
    pub per_path: Vec<PathMoment>,
    /// `Σ_path P(path) · E[estimate(path)²]`.
    pub weighted_second_moment: f64,
}

#[derive(Debug, Clone)]
pub struct PathMoment {
    pub path: PseudoPath,
    pub probability: f64,
    pub utility: f64,
    pub allocation: usize,
    pub expected_estimate: f64,
}

/// Runs the real signal code for every possible played path and averages the
/// resulting estimates of every comparator path.
pub fn exact_estimator_moments(
    state: &WeightState,
    adversary: &BidProfile,
    values: &Valuation,
    graph: &PseudoGraph,
    mode: FeedbackMode,
    cap: u64,
) -> Result<EstimatorMoments, OracleError> {
    let dist = exact_path_distribution(state, graph, cap)?;
    let mut first = vec![0.0; dist.len()];
    let mut second = vec![0.0; dist.len()];
    for (played, p) in &dist {
        let outcome = clear_auction(&decode(graph, played)?, adversary, PricingRule::Lab, values)?;
        let view = FeedbackView::observe(mode, &outcome, adversary);
        let signal = signal_from_view(graph, state, played, &view, values)?;
        for (i, (path, _)) in dist.iter().enumerate() {
            let est = signal.path_sum(path);
            first[i] += p * est;
            second[i] += p * est * est;
        }
    }
    let mut per_path = Vec::with_capacity(dist.len());
    let mut weighted_second_moment = 0.0;
    for (i, (path, p)) in dist.into_iter().enumerate() {
        let outcome = clear_auction(&decode(graph, &path)?, adversary, PricingRule::Lab, values)?;
        weighted_second_moment += p * second[i];
        per_path.push(PathMoment {
            path,
            probability: p,
            utility: outcome.utility,
            allocation: outcome.allocation,
            expected_estimate: first[i],
        });
    }
    Ok(EstimatorMoments {
        per_path,
        weighted_second_moment,
    })
}

/// Probability that `node` is observable, by summing over every played path
/// whose outcome reveals it.
pub fn observation_probability_by_paths(
    state: &WeightState,
    node: PseudoNode,
    adversary: &BidProfile,
    values: &Valuation,
    graph: &PseudoGraph,
    cap: u64,
) -> Result<f64, OracleError> {
    let mut total = 0.0;
    for (path, p) in exact_path_distribution(state, graph, cap)? {
        let out = clear_auction(&decode(graph, &path)?, adversary, PricingRule::Lab, values)?;
        if observed(node, out.allocation, out.price, graph.grid()) {
            total += p;
        }
    }
    Ok(total)
}

/// Probability that `node` is observable, by partitioning on which node
/// fires (or that nothing is won).
pub fn observation_probability_by_outcome(
    state: &WeightState,
    node: PseudoNode,
    adversary: &BidProfile,
    graph: &PseudoGraph,
) -> f64 {
    let mut total = 0.0;
    let mut fired_mass = 0.0;
    for (idx, &other) in graph.nodes().iter().enumerate() {
        if let Some(price) = node_fires(other, adversary, graph.grid()) {
            let m = state.node_marginal(idx);
            fired_mass += m;
            if observed(node, other.unit() as usize, price, graph.grid()) {
                total += m;
            }
        }
    }
    total + (1.0 - fired_mass)
}
