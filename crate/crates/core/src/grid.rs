//! The learner's bid grid `{0, ε, 2ε, …, 1}` with `1/ε` an integer.
//!
//! A grid may carry a uniform offset `X ∈ [0, ε)` (the tie-avoiding
//! perturbation): level `j` then maps to `min(jε + X, 1)`. Every part of the
//! crate that needs the numeric value of a level goes through [`Grid::value`],
//! so clearing prices and sub-utility prices are the same `f64` bit for bit.

use thiserror::Error;

/// Relative slack allowed when recovering an integer `1/ε` from a real `ε`.
const INVERSE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("epsilon must be in (0, 1], got {0}")]
    EpsilonOutOfRange(f64),
    #[error("1/epsilon must be an integer, got epsilon = {0}")]
    NonIntegerInverse(f64),
    #[error("offset {offset} must lie in [0, epsilon = {epsilon})")]
    OffsetTooLarge { offset: f64, epsilon: f64 },
}

/// Uniform bid grid with `levels + 1` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    inv_epsilon: u32,
    offset: f64,
}

impl Grid {
    /// Grid with step `1 / inv_epsilon`.
    ///
    /// `inv_epsilon = 0` is accepted as the degenerate grid `{0}` (a single
    /// level), which yields a one-path action space.
    pub fn new(inv_epsilon: u32) -> Self {
        Self {
            inv_epsilon,
            offset: 0.0,
        }
    }

    /// Grid from a real step size; `1/epsilon` must be an integer up to
    /// floating-point noise.
    pub fn from_epsilon(epsilon: f64) -> Result<Self, GridError> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(GridError::EpsilonOutOfRange(epsilon));
        }
        let inv = 1.0 / epsilon;
        let rounded = inv.round();
        if (inv - rounded).abs() > INVERSE_TOLERANCE * rounded {
            return Err(GridError::NonIntegerInverse(epsilon));
        }
        Ok(Self::new(rounded as u32))
    }

    /// Same grid shifted by `offset ∈ [0, ε)`, values capped at 1.
    pub fn with_offset(self, offset: f64) -> Result<Self, GridError> {
        let epsilon = self.epsilon();
        if !(offset >= 0.0 && offset < epsilon) {
            return Err(GridError::OffsetTooLarge { offset, epsilon });
        }
        Ok(Self { offset, ..self })
    }

    /// Number of steps `1/ε`; the top level index.
    pub fn inv_epsilon(&self) -> u32 {
        self.inv_epsilon
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn epsilon(&self) -> f64 {
        if self.inv_epsilon == 0 {
            f64::INFINITY
        } else {
            1.0 / self.inv_epsilon as f64
        }
    }

    /// Numeric bid of level `j`.
    pub fn value(&self, level: u32) -> f64 {
        debug_assert!(level <= self.inv_epsilon);
        let base = if level == 0 {
            0.0
        } else {
            level as f64 / self.inv_epsilon as f64
        };
        if self.offset == 0.0 {
            base
        } else {
            (base + self.offset).min(1.0)
        }
    }

    /// Level whose value is exactly `bid`, if any.
    pub fn level_of(&self, bid: f64) -> Option<u32> {
        if !bid.is_finite() {
            return None;
        }
        let approx = ((bid - self.offset) * self.inv_epsilon as f64).round();
        let mut candidates = [approx as i64, self.inv_epsilon as i64];
        candidates.sort_unstable();
        candidates
            .into_iter()
            .filter(|&j| j >= 0 && j <= self.inv_epsilon as i64)
            .map(|j| j as u32)
            .find(|&j| self.value(j) == bid)
    }

    /// Whether `bid` coincides with some grid value.
    pub fn contains(&self, bid: f64) -> bool {
        self.level_of(bid).is_some()
    }

    /// Index `j` with `value(j) < price < value(j + 1)`, for an off-grid price
    /// strictly inside the grid's range.
    pub fn bracket(&self, price: f64) -> Option<u32> {
        if self.inv_epsilon == 0 {
            return None;
        }
        let approx = ((price - self.offset) * self.inv_epsilon as f64).floor();
        let lo = (approx as i64 - 1).max(0);
        let hi = (approx as i64 + 1).min(self.inv_epsilon as i64 - 1);
        (lo..=hi)
            .map(|j| j as u32)
            .find(|&j| self.value(j) < price && price < self.value(j + 1))
    }

    /// All grid values in increasing order.
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.inv_epsilon).map(|j| self.value(j))
    }
}
