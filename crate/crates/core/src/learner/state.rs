//! Log-domain node weights with weight-pushing passes.

use rand::Rng;

use super::signals::EstimateVector;
use crate::pseudo::{PseudoGraph, PseudoPath};

/// `log Σ exp(x)`; `-∞` for an empty or all-`-∞` input.
pub(crate) fn log_sum_exp<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let xs: Vec<f64> = xs.into_iter().collect();
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Node weights of the exponential-weights learner, indexed like the graph.
#[derive(Debug, Clone)]
pub struct WeightState {
    pub(crate) log_w: Vec<f64>,
    backward: Vec<f64>,
    forward: Vec<f64>,
    log_gamma0: f64,
    round: u64,
}

impl WeightState {
    /// All weights one.
    pub fn new(graph: &PseudoGraph) -> Self {
        let n = graph.node_count();
        let mut state = Self {
            log_w: vec![0.0; n],
            backward: vec![0.0; n],
            forward: vec![0.0; n],
            log_gamma0: 0.0,
            round: 0,
        };
        state.refresh(graph);
        state
    }

    pub fn log_weight(&self, idx: usize) -> f64 {
        self.log_w[idx]
    }

    pub fn set_log_weight(&mut self, idx: usize, value: f64) {
        self.log_w[idx] = value;
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_w
    }

    /// `log Γ` of a node: total weight of its completions to a sink.
    pub fn log_backward(&self, idx: usize) -> f64 {
        self.backward[idx]
    }

    /// `log F` of a node: total weight of prefixes ending at it.
    pub fn log_forward(&self, idx: usize) -> f64 {
        self.forward[idx]
    }

    /// `log Γ_0`: total weight of all paths.
    pub fn log_gamma0(&self) -> f64 {
        self.log_gamma0
    }

    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn backward_pass(&mut self, graph: &PseudoGraph) {
        for &idx in graph.topological().iter().rev() {
            let succ = graph.successors(idx);
            self.backward[idx] = if succ.is_empty() {
                0.0
            } else {
                log_sum_exp(succ.iter().map(|&s| self.log_w[s] + self.backward[s]))
            };
        }
        self.log_gamma0 = log_sum_exp(
            graph
                .starts()
                .iter()
                .map(|&s| self.log_w[s] + self.backward[s]),
        );
    }

    pub fn forward_pass(&mut self, graph: &PseudoGraph) {
        for &idx in graph.topological() {
            let pred = graph.predecessors(idx);
            self.forward[idx] = if pred.is_empty() {
                self.log_w[idx]
            } else {
                self.log_w[idx] + log_sum_exp(pred.iter().map(|&p| self.forward[p]))
            };
        }
    }

    /// Both passes.
    pub fn refresh(&mut self, graph: &PseudoGraph) {
        self.backward_pass(graph);
        self.forward_pass(graph);
    }

    /// Probability that a sampled path contains node `idx`.
    pub fn node_marginal(&self, idx: usize) -> f64 {
        (self.forward[idx] + self.backward[idx] - self.log_gamma0).exp()
    }

    /// Draws a path node by node: the start with probability
    /// `W(h) Γ(h) / Γ_0`, each successor with probability `W(h') Γ(h') / Γ(h)`.
    pub fn sample_path<R: Rng + ?Sized>(&self, graph: &PseudoGraph, rng: &mut R) -> PseudoPath {
        let mut nodes = Vec::with_capacity(graph.units() as usize * 2);
        let mut current = self.choose(graph.starts(), self.log_gamma0, rng);
        nodes.push(graph.node(current));
        while !graph.successors(current).is_empty() {
            current = self.choose(graph.successors(current), self.backward[current], rng);
            nodes.push(graph.node(current));
        }
        PseudoPath::new(nodes)
    }

    fn choose<R: Rng + ?Sized>(&self, options: &[usize], log_total: f64, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut last_positive = options[0];
        for &o in options {
            let p = (self.log_w[o] + self.backward[o] - log_total).exp();
            if p > 0.0 {
                last_positive = o;
            }
            acc += p;
            if u < acc {
                return o;
            }
        }
        last_positive
    }

    /// Probability that [`Self::sample_path`] returns `path`, as the product of
    /// its conditional draws.
    pub fn path_probability(&self, graph: &PseudoGraph, path: &PseudoPath) -> f64 {
        let Some(indices) = graph.path_indices(path) else {
            return 0.0;
        };
        let mut log_p = self.log_w[indices[0]] + self.backward[indices[0]] - self.log_gamma0;
        for w in indices.windows(2) {
            log_p += self.log_w[w[1]] + self.backward[w[1]] - self.backward[w[0]];
        }
        log_p.exp()
    }

    /// Multiplies each listed node's weight by `exp(eta * signal)` and
    /// advances the round counter. Passes must be refreshed before the next
    /// draw.
    pub fn update_weights(&mut self, graph: &PseudoGraph, signal: &EstimateVector, eta: f64) {
        for (&node, &value) in signal.entries() {
            let idx = graph
                .index_of(node)
                .expect("signal node belongs to the graph");
            self.log_w[idx] += eta * value;
        }
        self.round += 1;
    }
}
