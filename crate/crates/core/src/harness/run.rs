use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use super::config::{ConfigError, RunConfig, TieMode};
use crate::adversary::{Adversary, AdversaryError, BidSource, PublicOutcome};
use crate::auction::{clear_auction, AuctionError, PricingRule};
use crate::grid::{Grid, GridError};
use crate::learner::{full_info_signal, FeedbackView, Learner, SignalError};
use crate::oracle::best_fixed_action_dp;
use crate::pseudo::PseudoGraph;

/// Upper end of the grid offset in perturb mode, as a fraction of the step.
const PERTURB_FRACTION: f64 = 0.01;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("round {round}: {source}")]
    Adversary { round: u64, source: AdversaryError },
    #[error("round {round}: {source}")]
    Auction { round: u64, source: AuctionError },
    #[error("round {round}: {source}")]
    Signal { round: u64, source: SignalError },
    #[error("building worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegretRow {
    pub t: u64,
    pub realized_utility: f64,
    pub expected_utility: f64,
    pub cum_expected_regret: f64,
    /// `K t ε`: how much the grid can cost against continuous bids.
    pub discretization_bound: f64,
    pub price: f64,
    pub allocation: usize,
}

#[derive(Debug, Clone)]
pub struct RegretTrace {
    pub run: u32,
    pub rows: Vec<RegretRow>,
    /// Best fixed grid action's total over the whole history.
    pub comparator_total: f64,
    pub wall_clock: Duration,
}

impl RegretTrace {
    pub fn final_regret(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.cum_expected_regret)
    }
}

/// Random source of replication `run`: one stream per replication.
pub fn replication_rng(seed: u64, run: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run as u64);
    rng
}

/// One replication: sample, clear, narrow the feedback, learn, and track the
/// best fixed action of the history so far.
pub fn run_replication(config: &RunConfig, run: u32) -> Result<RegretTrace, RunError> {
    if config.pricing != PricingRule::Lab {
        return Err(ConfigError::FrbLearning.into());
    }
    let started = Instant::now();
    let params = config.parameters()?;
    let mut rng = replication_rng(config.seed, run);
    let mut grid = Grid::new(params.inv_epsilon);
    if config.tie_mode == TieMode::Perturb {
        let offset = rng.gen_range(0.0..grid.epsilon() * PERTURB_FRACTION);
        grid = grid.with_offset(offset)?;
    }
    let graph = PseudoGraph::new(config.units, grid);
    let mut learner = Learner::new(graph, config.feedback, params.eta, config.values.clone());
    let mut adversary = Adversary::new(config.adversary.clone(), config.units as usize, grid);
    let mut totals = vec![0.0; learner.graph().node_count()];
    let mut cumulative_expected = 0.0;
    let mut rows = Vec::with_capacity(config.horizon as usize);
    let units = config.units as f64;

    for round in 1..=config.horizon {
        let beta = adversary
            .next_bids(round, &mut rng)
            .map_err(|source| RunError::Adversary { round, source })?;
        let played = learner.sample(&mut rng);
        let outcome = clear_auction(
            &learner.bids(&played),
            &beta,
            PricingRule::Lab,
            &config.values,
        )
        .map_err(|source| RunError::Auction { round, source })?;
        let expected = learner.expected_utility(&beta);
        let view = FeedbackView::observe(config.feedback, &outcome, &beta);
        learner
            .learn(&played, &view)
            .map_err(|source| RunError::Signal { round, source })?;
        adversary.observe(&PublicOutcome {
            price: outcome.price,
            allocation: outcome.allocation,
        });

        for (node, w) in full_info_signal(learner.graph(), &beta, &config.values).entries() {
            totals[learner.graph().index_of(*node).expect("node in graph")] += w;
        }
        let (_, comparator) = best_fixed_action_dp(&totals, learner.graph());
        cumulative_expected += expected;
        rows.push(RegretRow {
            t: round,
            realized_utility: outcome.utility,
            expected_utility: expected,
            cum_expected_regret: comparator - cumulative_expected,
            discretization_bound: units * round as f64 * grid.epsilon(),
            price: outcome.price,
            allocation: outcome.allocation,
        });
    }
    let comparator_total = best_fixed_action_dp(&totals, learner.graph()).1;
    Ok(RegretTrace {
        run,
        rows,
        comparator_total,
        wall_clock: started.elapsed(),
    })
}

/// All replications, in parallel, returned in replication order.
pub fn run_experiment(config: &RunConfig) -> Result<Vec<RegretTrace>, RunError> {
    let job = || {
        (0..config.replications)
            .into_par_iter()
            .map(|run| run_replication(config, run))
            .collect::<Result<Vec<_>, _>>()
    };
    match config.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| RunError::Pool(e.to_string()))?
            .install(job),
        None => job(),
    }
}
