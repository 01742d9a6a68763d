//! Exponential weights over the pseudo-bid paths.
//!
//! Each node carries a weight and a path's weight is the product along it.
//! Sampling, marginals and expected utilities are all computed from the
//! forward and backward passes over the graph, never by enumerating paths.

mod params;
mod signals;
mod state;

use rand::Rng;

pub use params::{default_parameters, EtaForm, ParamError, Parameters};
pub use signals::{
    allwinner_signal, bandit_signal, full_info_signal, observation_probability, signal_from_view,
    EstimateVector, FeedbackMode, FeedbackView, SignalError,
};
pub use state::WeightState;

pub(crate) use state::log_sum_exp;

use crate::auction::{BidProfile, Valuation};
use crate::pseudo::{firing_price, PseudoGraph, PseudoPath};

/// Utility of a draw from the current weights, in expectation.
///
/// Exactly one node per winning path fires, so the expectation is the sum of
/// firing nodes' sub-utilities weighted by their marginals.
pub fn expected_utility(
    graph: &PseudoGraph,
    state: &WeightState,
    adversary: &BidProfile,
    values: &Valuation,
) -> f64 {
    graph
        .nodes()
        .iter()
        .enumerate()
        .filter_map(|(i, &node)| {
            let price = firing_price(node, adversary, graph.grid())??;
            Some(state.node_marginal(i) * values.utility(node.unit() as usize, price))
        })
        .sum()
}

/// A learner bound to one graph, feedback model and learning rate.
#[derive(Debug, Clone)]
pub struct Learner {
    graph: PseudoGraph,
    state: WeightState,
    mode: FeedbackMode,
    eta: f64,
    values: Valuation,
}

impl Learner {
    pub fn new(graph: PseudoGraph, mode: FeedbackMode, eta: f64, values: Valuation) -> Self {
        let state = WeightState::new(&graph);
        Self {
            graph,
            state,
            mode,
            eta,
            values,
        }
    }

    pub fn graph(&self) -> &PseudoGraph {
        &self.graph
    }

    pub fn state(&self) -> &WeightState {
        &self.state
    }

    pub fn mode(&self) -> FeedbackMode {
        self.mode
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn values(&self) -> &Valuation {
        &self.values
    }

    /// Draws this round's action.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> PseudoPath {
        self.state.sample_path(&self.graph, rng)
    }

    /// Expected utility of this round's draw against `adversary`.
    pub fn expected_utility(&self, adversary: &BidProfile) -> f64 {
        expected_utility(&self.graph, &self.state, adversary, &self.values)
    }

    /// Folds this round's feedback into the weights and refreshes the passes
    /// for the next draw.
    pub fn learn(&mut self, played: &PseudoPath, view: &FeedbackView) -> Result<(), SignalError> {
        if view.mode() != self.mode {
            return Err(SignalError::ModeMismatch);
        }
        let signal = signal_from_view(&self.graph, &self.state, played, view, &self.values)?;
        self.state.update_weights(&self.graph, &signal, self.eta);
        self.state.refresh(&self.graph);
        Ok(())
    }

    /// The learner's bids for a drawn path.
    pub fn bids(&self, path: &PseudoPath) -> BidProfile {
        crate::pseudo::decode(&self.graph, path).expect("sampled paths are well formed")
    }
}
