//! Adversary bid generators.
//!
//! Every profile handed to the auction is non-increasing, lies strictly
//! inside `(0, 1)` and avoids the learner's grid, so clearing never meets a
//! tie.

use std::f64::consts::SQRT_2;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

use crate::auction::{
    clear_auction, validate_adversary_profile, AuctionError, BidProfile, PricingRule, Valuation,
};
use crate::grid::Grid;

/// Attempts at redrawing a random value that landed on the grid.
const MAX_REDRAWS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdversaryError {
    #[error("adversary bid {value} lies on the learner's grid")]
    GridCollision { value: f64 },
    #[error("invalid adversary profile: {0}")]
    Invalid(#[from] AuctionError),
    #[error("cannot parse adversary `{input}`: {reason}")]
    Parse { input: String, reason: String },
}

/// Where the low bid of the first-price reduction comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarSource {
    /// Cycled in order.
    Sequence(Vec<f64>),
    /// Independent uniform draws on `(lo, hi)`.
    Uniform { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum AdversarySpec {
    Fixed(Vec<f64>),
    /// Each coordinate uniform on `(lo, hi)`, sorted high to low.
    IidUniform {
        lo: f64,
        hi: f64,
    },
    /// One profile per round, cycled.
    Schedule(Vec<Vec<f64>>),
    /// `K − 1` bids just below 1 and one scalar bid `h`: only the learner's
    /// top bid matters and it faces a first-price auction against `h`.
    FirstPriceReduction(ScalarSource),
}

/// Public result of a round, the only thing an adversary may react to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PublicOutcome {
    pub price: f64,
    pub allocation: usize,
}

/// A source of adversary profiles, one per round.
pub trait BidSource {
    fn next_bids<R: Rng + ?Sized>(
        &mut self,
        round: u64,
        rng: &mut R,
    ) -> Result<BidProfile, AdversaryError>;

    /// Called after each round; the provided kinds ignore it.
    fn observe(&mut self, _outcome: &PublicOutcome) {}
}

/// Generator for an [`AdversarySpec`] facing a learner on `grid`.
#[derive(Debug, Clone)]
pub struct Adversary {
    spec: AdversarySpec,
    units: usize,
    grid: Grid,
}

impl Adversary {
    pub fn new(spec: AdversarySpec, units: usize, grid: Grid) -> Self {
        Self { spec, units, grid }
    }

    pub fn spec(&self) -> &AdversarySpec {
        &self.spec
    }

    fn check(&self, bids: &[f64]) -> Result<BidProfile, AdversaryError> {
        validate_adversary_profile(bids, self.units, &self.grid).map_err(|e| match e {
            AuctionError::OnGrid { value, .. } => AdversaryError::GridCollision { value },
            other => AdversaryError::Invalid(other),
        })
    }

    fn draw_off_grid<R: Rng + ?Sized>(
        &self,
        lo: f64,
        hi: f64,
        rng: &mut R,
    ) -> Result<f64, AdversaryError> {
        let mut value = lo;
        for _ in 0..MAX_REDRAWS {
            value = rng.gen_range(lo..hi);
            if value > 0.0 && !self.grid.contains(value) {
                return Ok(value);
            }
        }
        Err(AdversaryError::GridCollision { value })
    }
}

impl BidSource for Adversary {
    fn next_bids<R: Rng + ?Sized>(
        &mut self,
        round: u64,
        rng: &mut R,
    ) -> Result<BidProfile, AdversaryError> {
        let index = round.saturating_sub(1) as usize;
        match &self.spec {
            AdversarySpec::Fixed(bids) => self.check(bids),
            AdversarySpec::Schedule(list) => self.check(&list[index % list.len()]),
            AdversarySpec::IidUniform { lo, hi } => {
                let mut bids = (0..self.units)
                    .map(|_| self.draw_off_grid(*lo, *hi, rng))
                    .collect::<Result<Vec<_>, _>>()?;
                bids.sort_by(|a, b| b.total_cmp(a));
                self.check(&bids)
            }
            AdversarySpec::FirstPriceReduction(source) => {
                let top = 1.0 - reduction_nudge(&self.grid);
                let h = match source {
                    ScalarSource::Sequence(list) => list[index % list.len()],
                    ScalarSource::Uniform { lo, hi } => {
                        self.draw_off_grid(*lo, hi.min(top), rng)?
                    }
                };
                self.check(&reduction_profile(self.units, h, &self.grid))
            }
        }
    }
}

/// Gap between 1 and the high bids of the first-price reduction: an
/// irrational fraction of the grid step, so never on the grid.
pub fn reduction_nudge(grid: &Grid) -> f64 {
    grid.epsilon().min(1.0) / SQRT_2
}

/// `(1 − δ, …, 1 − δ, h)` with `K − 1` high bids.
pub fn reduction_profile(units: usize, h: f64, grid: &Grid) -> Vec<f64> {
    let mut bids = vec![1.0 - reduction_nudge(grid); units - 1];
    bids.push(h);
    bids
}

/// Units won and, when positive, the price: what bandit feedback reveals.
pub type BanditObservation = (usize, Option<f64>);

/// A first-price auction for a single unit of value 1 against bid `h`.
pub fn first_price_formula(b1: f64, h: f64) -> (f64, BanditObservation) {
    if b1 > h {
        (1.0 - b1, (1, Some(b1)))
    } else {
        (0.0, (0, None))
    }
}

/// Clears the reduction environment for a learner bidding `(b1, 0, …, 0)`
/// with values `(1, 0, …, 0)`.
pub fn reduction_consistency_check(
    b1: f64,
    h: f64,
    units: usize,
    grid: &Grid,
) -> Result<(f64, BanditObservation), AdversaryError> {
    let mut learner = vec![0.0; units];
    learner[0] = b1;
    let mut values = vec![0.0; units];
    values[0] = 1.0;
    let learner = crate::auction::validate_bid_profile(&learner, units, Some(grid))?;
    let adversary = validate_adversary_profile(&reduction_profile(units, h, grid), units, grid)?;
    let out = clear_auction(
        &learner,
        &adversary,
        PricingRule::Lab,
        &Valuation::new(values)?,
    )?;
    let price = (out.allocation > 0).then_some(out.price);
    Ok((out.utility, (out.allocation, price)))
}

fn parse_list(input: &str, text: &str) -> Result<Vec<f64>, AdversaryError> {
    text.split(',')
        .map(|t| {
            t.trim().parse::<f64>().map_err(|e| AdversaryError::Parse {
                input: input.to_string(),
                reason: format!("`{t}`: {e}"),
            })
        })
        .collect()
}

fn parse_range(input: &str, text: Option<&str>) -> Result<(f64, f64), AdversaryError> {
    let Some(text) = text else {
        return Ok((0.0, 1.0));
    };
    match parse_list(input, text)?.as_slice() {
        &[lo, hi] if 0.0 <= lo && lo < hi && hi <= 1.0 => Ok((lo, hi)),
        _ => Err(AdversaryError::Parse {
            input: input.to_string(),
            reason: "expected `lo,hi` with 0 <= lo < hi <= 1".into(),
        }),
    }
}

impl FromStr for AdversarySpec {
    type Err = AdversaryError;

    /// `fixed:b1,…,bK`, `iid[:lo,hi]`, `schedule:b1,…;b1,…`,
    /// `fpr:h1,h2,…` or `fpr-iid[:lo,hi]`.
    fn from_str(input: &str) -> Result<Self, Self::Err> {
        let (kind, params) = match input.split_once(':') {
            Some((k, p)) => (k.trim(), Some(p.trim())),
            None => (input.trim(), None),
        };
        let need = || match params {
            Some(s) if !s.is_empty() => Ok(s),
            _ => Err(AdversaryError::Parse {
                input: input.to_string(),
                reason: format!("`{kind}` needs parameters"),
            }),
        };
        match kind {
            "fixed" => Ok(Self::Fixed(parse_list(input, need()?)?)),
            "iid" => {
                let (lo, hi) = parse_range(input, params)?;
                Ok(Self::IidUniform { lo, hi })
            }
            "schedule" => Ok(Self::Schedule(
                need()?
                    .split(';')
                    .map(|p| parse_list(input, p))
                    .collect::<Result<_, _>>()?,
            )),
            "fpr" => Ok(Self::FirstPriceReduction(ScalarSource::Sequence(
                parse_list(input, need()?)?,
            ))),
            "fpr-iid" => {
                let (lo, hi) = parse_range(input, params)?;
                Ok(Self::FirstPriceReduction(ScalarSource::Uniform { lo, hi }))
            }
            _ => Err(AdversaryError::Parse {
                input: input.to_string(),
                reason: format!("unknown kind `{kind}`"),
            }),
        }
    }
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(f64::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

impl fmt::Display for AdversarySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Fixed(b) => write!(f, "fixed:{}", join(b)),
            Self::IidUniform { lo, hi } => write!(f, "iid:{lo},{hi}"),
            Self::Schedule(list) => {
                let rows: Vec<String> = list.iter().map(|b| join(b)).collect();
                write!(f, "schedule:{}", rows.join(";"))
            }
            Self::FirstPriceReduction(ScalarSource::Sequence(h)) => write!(f, "fpr:{}", join(h)),
            Self::FirstPriceReduction(ScalarSource::Uniform { lo, hi }) => {
                write!(f, "fpr-iid:{lo},{hi}")
            }
        }
    }
}
