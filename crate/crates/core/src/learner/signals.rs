//! Per-round sub-utility signals for the three feedback models.
//!
//! Full information credits every firing node with its true sub-utility.
//! Bandit feedback credits only the node that fired on the played path,
//! importance-weighted by its marginal. All-winner feedback credits every
//! firing node whose sub-utility the feedback reveals, importance-weighted by
//! the probability that it is revealed. Both partial estimators shift the
//! sub-utility by `−K` so that every entry is non-positive.

use std::collections::BTreeMap;

use thiserror::Error;

use super::state::WeightState;
use crate::auction::{AuctionOutcome, BidProfile, Valuation};
use crate::pseudo::{
    firing_price, observed, AdversaryInfo, PseudoGraph, PseudoNode, PseudoPath, RevealedBids,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SignalError {
    #[error("fired node {0} has zero marginal probability")]
    ZeroMarginal(PseudoNode),
    #[error("observable node {0} has zero observation probability")]
    ZeroObservationProbability(PseudoNode),
    #[error("feedback is inconsistent with the played path: {0}")]
    InconsistentFeedback(&'static str),
    #[error("feedback view does not match the learner's mode")]
    ModeMismatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FeedbackMode {
    FullInformation,
    Bandit,
    AllWinner,
}

/// Everything the learner is allowed to see after a round.
#[derive(Debug, Clone, PartialEq)]
pub enum FeedbackView {
    Full {
        adversary: BidProfile,
    },
    /// Units won, and the price only if something was won.
    Bandit {
        allocation: usize,
        price: Option<f64>,
    },
    /// Units won, the price, and the adversary's winning bids (highest
    /// first). The learner already knows its own winning bids.
    AllWinner {
        allocation: usize,
        price: f64,
        winning: Vec<f64>,
    },
}

impl FeedbackView {
    /// Narrows a cleared LAB auction to what `mode` reveals.
    pub fn observe(mode: FeedbackMode, outcome: &AuctionOutcome, adversary: &BidProfile) -> Self {
        match mode {
            FeedbackMode::FullInformation => Self::Full {
                adversary: adversary.clone(),
            },
            FeedbackMode::Bandit => Self::Bandit {
                allocation: outcome.allocation,
                price: (outcome.allocation > 0).then_some(outcome.price),
            },
            FeedbackMode::AllWinner => Self::AllWinner {
                allocation: outcome.allocation,
                price: outcome.price,
                winning: adversary.bids()[..adversary.units() - outcome.allocation].to_vec(),
            },
        }
    }

    pub fn mode(&self) -> FeedbackMode {
        match self {
            Self::Full { .. } => FeedbackMode::FullInformation,
            Self::Bandit { .. } => FeedbackMode::Bandit,
            Self::AllWinner { .. } => FeedbackMode::AllWinner,
        }
    }
}

/// Sparse per-node signal; nodes absent from the map have signal zero.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EstimateVector {
    entries: BTreeMap<PseudoNode, f64>,
}

impl EstimateVector {
    pub fn entries(&self) -> &BTreeMap<PseudoNode, f64> {
        &self.entries
    }

    pub fn get(&self, node: &PseudoNode) -> f64 {
        self.entries.get(node).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Estimated utility of a path: the sum of its nodes' entries.
    pub fn path_sum(&self, path: &PseudoPath) -> f64 {
        path.nodes().iter().fold(0.0, |acc, n| acc + self.get(n))
    }

    fn insert(&mut self, node: PseudoNode, value: f64) {
        self.entries.insert(node, value);
    }
}

/// True sub-utility of every node that fires against `adversary`.
pub fn full_info_signal(
    graph: &PseudoGraph,
    adversary: &BidProfile,
    values: &Valuation,
) -> EstimateVector {
    let mut out = EstimateVector::default();
    for &node in graph.nodes() {
        if let Some(Some(price)) = firing_price(node, adversary, graph.grid()) {
            out.insert(node, values.utility(node.unit() as usize, price));
        }
    }
    out
}

/// The node of `played` credited with `allocation` units at `price`.
fn credited_node(
    graph: &PseudoGraph,
    played: &PseudoPath,
    allocation: usize,
    price: f64,
) -> Option<PseudoNode> {
    let grid = graph.grid();
    played.nodes().iter().copied().find(|n| {
        n.unit() as usize == allocation
            && if n.is_bid() {
                grid.value(n.j) == price
            } else {
                grid.value(n.j) < price && price < grid.value(n.j + 1)
            }
    })
}

/// Importance-weighted estimate at the fired node of the played path.
pub fn bandit_signal(
    graph: &PseudoGraph,
    state: &WeightState,
    played: &PseudoPath,
    allocation: usize,
    price: Option<f64>,
    values: &Valuation,
) -> Result<EstimateVector, SignalError> {
    let mut out = EstimateVector::default();
    if allocation == 0 {
        return Ok(out);
    }
    let price = price.ok_or(SignalError::InconsistentFeedback(
        "positive allocation without a price",
    ))?;
    let fired = credited_node(graph, played, allocation, price).ok_or(
        SignalError::InconsistentFeedback("no node of the played path matches the outcome"),
    )?;
    let idx = graph
        .index_of(fired)
        .expect("played node belongs to the graph");
    let marginal = state.node_marginal(idx);
    if marginal.is_nan() || marginal <= 0.0 {
        return Err(SignalError::ZeroMarginal(fired));
    }
    let units = graph.units() as f64;
    out.insert(
        fired,
        (values.utility(allocation, price) - units) / marginal,
    );
    Ok(out)
}

/// Probability, over the learner's draw, that the sub-utility of the firing
/// node `node` is revealed by all-winner feedback.
///
/// Computed as one minus the mass of firing nodes whose outcome would hide
/// `node`. Those outcomes all win at least as many units as `node` does, so
/// `info` only needs the adversary bids ranked above them.
pub fn observation_probability<A: AdversaryInfo + ?Sized>(
    graph: &PseudoGraph,
    state: &WeightState,
    node: PseudoNode,
    info: &A,
) -> Result<f64, SignalError> {
    let grid = graph.grid();
    let unit = node.unit();
    let mut hidden = 0.0;
    for (idx, &other) in graph.nodes().iter().enumerate() {
        if other.unit() < unit {
            continue;
        }
        if other.unit() == unit {
            if node.is_gap() {
                continue;
            }
            // A same-unit outcome hides a bid node only when priced above it.
            if other.is_bid() && grid.value(other.j) <= grid.value(node.j) {
                continue;
            }
        }
        let price = firing_price(other, info, grid).ok_or(SignalError::InconsistentFeedback(
            "feedback does not decide a needed outcome",
        ))?;
        if let Some(price) = price {
            if !observed(node, other.unit() as usize, price, grid) {
                hidden += state.node_marginal(idx);
            }
        }
    }
    Ok(1.0 - hidden)
}

/// Importance-weighted estimate at every firing node the feedback reveals.
pub fn allwinner_signal(
    graph: &PseudoGraph,
    state: &WeightState,
    allocation: usize,
    price: f64,
    winning: &[f64],
    values: &Valuation,
) -> Result<EstimateVector, SignalError> {
    let units = graph.units() as usize;
    if allocation > units || winning.len() != units - allocation {
        return Err(SignalError::InconsistentFeedback(
            "winning bids do not match the allocation",
        ));
    }
    let info = RevealedBids {
        winning,
        allocation,
        price,
    };
    let grid = graph.grid();
    let mut out = EstimateVector::default();
    for &node in graph.nodes() {
        if !observed(node, allocation, price, grid) {
            continue;
        }
        let fired = firing_price(node, &info, grid).ok_or(SignalError::InconsistentFeedback(
            "feedback does not decide an observed node",
        ))?;
        let Some(node_price) = fired else { continue };
        let q = observation_probability(graph, state, node, &info)?;
        if q.is_nan() || q <= 0.0 {
            return Err(SignalError::ZeroObservationProbability(node));
        }
        let w = values.utility(node.unit() as usize, node_price);
        out.insert(node, (w - units as f64) / q);
    }
    Ok(out)
}

/// Signal for one round from whatever `view` reveals.
pub fn signal_from_view(
    graph: &PseudoGraph,
    state: &WeightState,
    played: &PseudoPath,
    view: &FeedbackView,
    values: &Valuation,
) -> Result<EstimateVector, SignalError> {
    match view {
        FeedbackView::Full { adversary } => Ok(full_info_signal(graph, adversary, values)),
        FeedbackView::Bandit { allocation, price } => {
            bandit_signal(graph, state, played, *allocation, *price, values)
        }
        FeedbackView::AllWinner {
            allocation,
            price,
            winning,
        } => allwinner_signal(graph, state, *allocation, *price, winning, values),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auction::{clear_auction, PricingRule};
    use crate::pseudo::{build_graph, decode, path_utility, DEFAULT_PATH_CAP};

    fn profile(b: &[f64]) -> BidProfile {
        BidProfile::new(b.to_vec()).unwrap()
    }

    fn skewed_state(graph: &PseudoGraph) -> WeightState {
        let mut s = WeightState::new(graph);
        for i in 0..graph.node_count() {
            s.set_log_weight(i, ((i * 7 % 5) as f64 - 2.0) * 0.3);
        }
        s.refresh(graph);
        s
    }

    #[test]
    fn full_signal_sums_to_path_utility() {
        let g = build_graph(3, 4);
        let beta = profile(&[0.9, 0.55, 0.05]);
        let v = Valuation::new(vec![0.95, 0.7, 0.4]).unwrap();
        let signal = full_info_signal(&g, &beta, &v);
        assert!(signal.len() <= 2 * (9 + 4));
        for path in g.enumerate_paths(DEFAULT_PATH_CAP).unwrap() {
            assert_eq!(
                signal.path_sum(&path),
                path_utility(&path, &beta, &v, g.grid())
            );
        }
    }

    #[test]
    fn bandit_signal_sits_on_fired_node() {
        let g = build_graph(2, 4);
        let s = WeightState::new(&g);
        let v = Valuation::new(vec![1.0, 0.5]).unwrap();
        let beta = profile(&[0.8, 0.3]);
        let played = crate::pseudo::encode(&g, &profile(&[1.0, 0.5])).unwrap();
        let out =
            clear_auction(&decode(&g, &played).unwrap(), &beta, PricingRule::Lab, &v).unwrap();
        let sig = bandit_signal(&g, &s, &played, out.allocation, Some(out.price), &v).unwrap();
        assert_eq!(sig.len(), 1);
        let (node, value) = sig.entries().iter().next().unwrap();
        assert_eq!(*node, PseudoNode::gap(1, 3));
        let marginal = s.node_marginal(g.index_of(*node).unwrap());
        assert_eq!(*value, (0.2 - 2.0) / marginal);

        let zero = bandit_signal(&g, &s, &played, 0, None, &v).unwrap();
        assert!(zero.is_empty());
    }

    #[test]
    fn allwinner_covers_bandit_and_is_non_positive() {
        let g = build_graph(2, 4);
        let s = skewed_state(&g);
        let v = Valuation::new(vec![0.9, 0.6]).unwrap();
        let beta = profile(&[0.62, 0.18]);
        for played in g.enumerate_paths(DEFAULT_PATH_CAP).unwrap() {
            let out =
                clear_auction(&decode(&g, &played).unwrap(), &beta, PricingRule::Lab, &v).unwrap();
            let price = (out.allocation > 0).then_some(out.price);
            let bandit = bandit_signal(&g, &s, &played, out.allocation, price, &v).unwrap();
            let FeedbackView::AllWinner {
                allocation,
                price,
                winning,
            } = FeedbackView::observe(FeedbackMode::AllWinner, &out, &beta)
            else {
                unreachable!()
            };
            let aw = allwinner_signal(&g, &s, allocation, price, &winning, &v).unwrap();
            for node in bandit.entries().keys() {
                assert!(aw.entries().contains_key(node));
            }
            assert!(aw.entries().values().all(|&x| x <= 0.0));
            assert!(bandit.entries().values().all(|&x| x <= 0.0));
        }
    }

    #[test]
    fn observation_probability_is_at_least_own_marginal() {
        let g = build_graph(2, 4);
        let s = skewed_state(&g);
        let beta = profile(&[0.62, 0.18]);
        for (i, &node) in g.nodes().iter().enumerate() {
            if firing_price(node, &beta, g.grid()) == Some(None) {
                continue;
            }
            let q = observation_probability(&g, &s, node, &beta).unwrap();
            assert!(q >= s.node_marginal(i) - 1e-12);
            assert!(q <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn bandit_view_hides_price_on_zero_win() {
        let out = AuctionOutcome {
            price: 0.3,
            allocation: 0,
            utility: 0.0,
            price_setter: crate::auction::PriceSetter::ZeroWin,
        };
        let beta = profile(&[0.8, 0.3]);
        assert_eq!(
            FeedbackView::observe(FeedbackMode::Bandit, &out, &beta),
            FeedbackView::Bandit {
                allocation: 0,
                price: None
            }
        );
        assert_eq!(
            FeedbackView::observe(FeedbackMode::AllWinner, &out, &beta),
            FeedbackView::AllWinner {
                allocation: 0,
                price: 0.3,
                winning: vec![0.8, 0.3]
            }
        );
    }
}
