//! Single-shot K-unit uniform-price auction between the learner and an
//! aggregated adversary.
//!
//! Both sides submit `K` non-increasing bids in `[0, 1]`. The `K` highest of
//! the `2K` pooled bids win. Under LAB the price is the `K`-th highest pooled
//! bid, under FRB the `(K+1)`-th. The learner's allocation is the number of
//! its bids among the winners; its quasi-linear utility is
//! `Σ_{l ≤ x} (v_l − p)`.
//!
//! Learner and adversary bids must never coincide: clearing reports
//! [`AuctionError::TieDetected`] instead of picking a tie-break.

use thiserror::Error;

use crate::grid::{Grid, GridError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AuctionError {
    #[error("expected {expected} bids, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("bids must be non-increasing; bid {index} exceeds its predecessor")]
    NotMonotone { index: usize },
    #[error("value {value} at position {index} is outside the allowed range")]
    OutOfRange { index: usize, value: f64 },
    #[error("bid {value} at position {index} is not a grid multiple")]
    OffGrid { index: usize, value: f64 },
    #[error("adversary bid {value} at position {index} lies on the learner's grid")]
    OnGrid { index: usize, value: f64 },
    #[error("learner and adversary both bid {value}; the outcome is ambiguous")]
    TieDetected { value: f64 },
    #[error("clipping to valuations breaks monotonicity at position {index}")]
    NotMonotoneResult { index: usize },
    #[error(transparent)]
    Grid(#[from] GridError),
}

pub type Result<T> = std::result::Result<T, AuctionError>;

/// Non-increasing bids in `[0, 1]`, one per unit.
#[derive(Debug, Clone, PartialEq)]
pub struct BidProfile {
    bids: Vec<f64>,
    grid_aligned: bool,
}

impl BidProfile {
    /// Checks length, ordering and range; no grid requirement.
    pub fn new(bids: Vec<f64>) -> Result<Self> {
        let units = bids.len();
        validate_bid_profile(&bids, units, None)
    }

    pub fn bids(&self) -> &[f64] {
        &self.bids
    }

    pub fn units(&self) -> usize {
        self.bids.len()
    }

    /// `bid(1)` is the highest bid; indices are 1-based as in the auction
    /// literature.
    pub fn bid(&self, k: usize) -> f64 {
        self.bids[k - 1]
    }

    /// True when the profile was validated against a grid.
    pub fn is_grid_aligned(&self) -> bool {
        self.grid_aligned
    }

    pub(crate) fn from_grid_unchecked(bids: Vec<f64>) -> Self {
        Self {
            bids,
            grid_aligned: true,
        }
    }
}

/// Marginal values of the learner for its first, second, … unit.
///
/// Values need not be monotone.
#[derive(Debug, Clone, PartialEq)]
pub struct Valuation {
    values: Vec<f64>,
}

impl Valuation {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(AuctionError::WrongLength {
                expected: 1,
                got: 0,
            });
        }
        for (index, &value) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(AuctionError::OutOfRange { index, value });
            }
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn units(&self) -> usize {
        self.values.len()
    }

    /// Utility of winning `allocation` units at `price`.
    ///
    /// Summed left to right from `0.0`; clearing and the sub-utility
    /// decomposition both call this so their results agree bitwise.
    pub fn utility(&self, allocation: usize, price: f64) -> f64 {
        self.values[..allocation]
            .iter()
            .fold(0.0, |acc, &v| acc + (v - price))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PricingRule {
    /// Last accepted bid: the `K`-th highest pooled bid.
    Lab,
    /// First rejected bid: the `(K+1)`-th highest pooled bid.
    Frb,
}

/// Which bid determined the clearing price.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriceSetter {
    LearnerBid,
    AdversaryBid,
    /// The learner won nothing; the price is irrelevant to its utility.
    ZeroWin,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuctionOutcome {
    pub price: f64,
    pub allocation: usize,
    pub utility: f64,
    pub price_setter: PriceSetter,
}

/// Checks a raw bid vector. When `grid` is given every bid must be one of its
/// values.
pub fn validate_bid_profile(raw: &[f64], units: usize, grid: Option<&Grid>) -> Result<BidProfile> {
    if units == 0 || raw.len() != units {
        return Err(AuctionError::WrongLength {
            expected: units.max(1),
            got: raw.len(),
        });
    }
    for (index, &value) in raw.iter().enumerate() {
        if !(0.0..=1.0).contains(&value) {
            return Err(AuctionError::OutOfRange { index, value });
        }
        if index > 0 && value > raw[index - 1] {
            return Err(AuctionError::NotMonotone { index });
        }
        if let Some(grid) = grid {
            if !grid.contains(value) {
                return Err(AuctionError::OffGrid { index, value });
            }
        }
    }
    Ok(BidProfile {
        bids: raw.to_vec(),
        grid_aligned: grid.is_some(),
    })
}

/// Checks an adversary profile against the no-tie contract: every bid lies in
/// the open interval `(0, 1)` and off the learner's grid.
pub fn validate_adversary_profile(raw: &[f64], units: usize, grid: &Grid) -> Result<BidProfile> {
    let profile = validate_bid_profile(raw, units, None)?;
    for (index, &value) in raw.iter().enumerate() {
        if value <= 0.0 || value >= 1.0 {
            return Err(AuctionError::OutOfRange { index, value });
        }
        if grid.contains(value) {
            return Err(AuctionError::OnGrid { index, value });
        }
    }
    Ok(profile)
}

/// Clears one auction.
pub fn clear_auction(
    learner: &BidProfile,
    adversary: &BidProfile,
    rule: PricingRule,
    values: &Valuation,
) -> Result<AuctionOutcome> {
    let units = learner.units();
    if adversary.units() != units {
        return Err(AuctionError::WrongLength {
            expected: units,
            got: adversary.units(),
        });
    }
    if values.units() != units {
        return Err(AuctionError::WrongLength {
            expected: units,
            got: values.units(),
        });
    }
    if let Some(&value) = learner.bids().iter().find(|b| adversary.bids().contains(b)) {
        return Err(AuctionError::TieDetected { value });
    }

    // Both sides are already sorted; merge them. Equal values only occur
    // within one side, where the order is irrelevant.
    let (lb, ab) = (learner.bids(), adversary.bids());
    let (mut i, mut j) = (0, 0);
    let mut allocation = 0;
    let mut ranked = Vec::with_capacity(units + 1);
    while ranked.len() <= units {
        let take_learner = j == ab.len() || (i < lb.len() && lb[i] > ab[j]);
        if take_learner {
            if ranked.len() < units {
                allocation += 1;
            }
            ranked.push((lb[i], true));
            i += 1;
        } else {
            ranked.push((ab[j], false));
            j += 1;
        }
    }
    let (price, from_learner) = match rule {
        PricingRule::Lab => ranked[units - 1],
        PricingRule::Frb => ranked[units],
    };
    let price_setter = if allocation == 0 {
        PriceSetter::ZeroWin
    } else if from_learner {
        PriceSetter::LearnerBid
    } else {
        PriceSetter::AdversaryBid
    };
    Ok(AuctionOutcome {
        price,
        allocation,
        utility: values.utility(allocation, price),
        price_setter,
    })
}

/// Lowers every bid to at most the matching marginal value.
pub fn clip_dominated(bids: &BidProfile, values: &Valuation) -> Result<BidProfile> {
    if values.units() != bids.units() {
        return Err(AuctionError::WrongLength {
            expected: bids.units(),
            got: values.units(),
        });
    }
    let clipped: Vec<f64> = bids
        .bids()
        .iter()
        .zip(values.values())
        .map(|(&b, &v)| b.min(v))
        .collect();
    if let Some(index) = (1..clipped.len()).find(|&i| clipped[i] > clipped[i - 1]) {
        return Err(AuctionError::NotMonotoneResult { index });
    }
    Ok(BidProfile {
        bids: clipped,
        grid_aligned: false,
    })
}

/// Shifts grid bids by a common `offset ∈ [0, ε)`, capping at 1.
pub fn apply_tie_offset(bids: &BidProfile, offset: f64, grid: &Grid) -> Result<BidProfile> {
    let shifted = grid.with_offset(offset)?;
    let mut out = Vec::with_capacity(bids.units());
    for (index, &value) in bids.bids().iter().enumerate() {
        let level = grid
            .level_of(value)
            .ok_or(AuctionError::OffGrid { index, value })?;
        out.push(shifted.value(level));
    }
    Ok(BidProfile {
        bids: out,
        grid_aligned: false,
    })
}
