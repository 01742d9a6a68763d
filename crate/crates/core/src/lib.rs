//! Learning to bid in repeated K-unit uniform-price auctions.
//!
//! A learner with fixed per-unit values submits `K` non-increasing bids each
//! round against an adversary's `K` bids. Bids are restricted to a grid, each
//! grid profile is a path in a small DAG ([`pseudo`]), and the learner runs
//! exponential weights over paths by keeping one weight per node
//! ([`learner`]). [`oracle`] holds brute-force references for small
//! instances and [`harness`] runs seeded regret experiments.

pub mod adversary;
pub mod auction;
pub mod grid;
pub mod harness;
pub mod learner;
pub mod oracle;
pub mod pseudo;

use thiserror::Error;

/// Any error from this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Grid(#[from] grid::GridError),
    #[error(transparent)]
    Auction(#[from] auction::AuctionError),
    #[error(transparent)]
    Pseudo(#[from] pseudo::PseudoError),
    #[error(transparent)]
    Signal(#[from] learner::SignalError),
    #[error(transparent)]
    Parameters(#[from] learner::ParamError),
    #[error(transparent)]
    Adversary(#[from] adversary::AdversaryError),
    #[error(transparent)]
    Oracle(#[from] oracle::OracleError),
    #[error(transparent)]
    Config(#[from] harness::config::ConfigError),
    #[error(transparent)]
    Run(#[from] harness::RunError),
    #[error(transparent)]
    Output(#[from] harness::OutputError),
}
