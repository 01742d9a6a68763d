use thiserror::Error;

use super::signals::FeedbackMode;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("horizon {horizon} must exceed the number of units {units}")]
    HorizonTooShort { units: u32, horizon: u64 },
}

/// Which learning-rate formula to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EtaForm {
    /// The rate stated with each regret guarantee.
    #[default]
    Standard,
    /// The rate that falls out of balancing the terms of the regret bound.
    Balanced,
}

/// Grid step and learning rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Parameters {
    pub inv_epsilon: u32,
    pub eta: f64,
}

impl Parameters {
    pub fn epsilon(&self) -> f64 {
        1.0 / self.inv_epsilon as f64
    }
}

/// Horizon-tuned defaults. The raw step is turned into an integer number of
/// grid steps by rounding `1/ε` up.
pub fn default_parameters(
    units: u32,
    horizon: u64,
    mode: FeedbackMode,
    form: EtaForm,
) -> Result<Parameters, ParamError> {
    if horizon <= units as u64 {
        return Err(ParamError::HorizonTooShort { units, horizon });
    }
    let k = units as f64;
    let t = horizon as f64;
    let raw_epsilon = match mode {
        FeedbackMode::Bandit => (k / t).cbrt(),
        FeedbackMode::FullInformation => (k / t).sqrt(),
        FeedbackMode::AllWinner => (k * k * k / t).sqrt(),
    };
    let inv_epsilon = inverse_step(raw_epsilon);
    let epsilon = 1.0 / inv_epsilon as f64;
    let log_ratio = (t / k).ln();
    let eta = match (mode, form) {
        (FeedbackMode::Bandit, EtaForm::Standard) => {
            k.powf(-1.0 / 3.0) * t.powf(-2.0 / 3.0) * (log_ratio / 3.0).sqrt()
        }
        (FeedbackMode::Bandit, EtaForm::Balanced) => {
            (epsilon * inverse_log(epsilon) / (k * t)).sqrt()
        }
        (FeedbackMode::FullInformation, EtaForm::Standard) => (log_ratio / (2.0 * k * t)).sqrt(),
        (FeedbackMode::FullInformation, EtaForm::Balanced) => {
            (inverse_log(epsilon) / (k * t)).sqrt()
        }
        (FeedbackMode::AllWinner, _) => 1.0 / (k * t.sqrt()),
    };
    Ok(Parameters { inv_epsilon, eta })
}

/// `ceil(1/ε)`, tolerant of floating noise, at least one.
fn inverse_step(epsilon: f64) -> u32 {
    if epsilon >= 1.0 {
        return 1;
    }
    ((1.0 / epsilon) - 1e-9).ceil().max(1.0) as u32
}

/// `ln(1/ε)`, floored away from zero so a single-step grid still learns.
fn inverse_log(epsilon: f64) -> f64 {
    (1.0 / epsilon).ln().max(std::f64::consts::LN_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bandit_defaults() {
        let p = default_parameters(2, 2000, FeedbackMode::Bandit, EtaForm::Standard).unwrap();
        assert_eq!(p.inv_epsilon, 10);
        let eta = 2f64.powf(-1.0 / 3.0) * 2000f64.powf(-2.0 / 3.0) * (1000f64.ln() / 3.0).sqrt();
        assert!((p.eta - eta).abs() < 1e-15);
    }

    #[test]
    fn full_information_defaults() {
        let p =
            default_parameters(2, 200, FeedbackMode::FullInformation, EtaForm::Standard).unwrap();
        assert_eq!(p.inv_epsilon, 10);
        assert!((p.eta - (100f64.ln() / 800.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn all_winner_defaults() {
        let p = default_parameters(2, 800, FeedbackMode::AllWinner, EtaForm::Standard).unwrap();
        assert_eq!(p.inv_epsilon, 10);
        assert!((p.eta - 1.0 / (2.0 * 800f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn rounds_step_count_up() {
        // (2/1000)^(1/3) = 0.126 -> 1/ε = 7.94 -> 8.
        let p = default_parameters(2, 1000, FeedbackMode::Bandit, EtaForm::Standard).unwrap();
        assert_eq!(p.inv_epsilon, 8);
        // K³/T above one: a single step.
        let p = default_parameters(3, 20, FeedbackMode::AllWinner, EtaForm::Standard).unwrap();
        assert_eq!(p.inv_epsilon, 1);
    }

    #[test]
    fn balanced_rates() {
        let p = default_parameters(2, 2000, FeedbackMode::Bandit, EtaForm::Balanced).unwrap();
        assert!((p.eta - (0.1 * 10f64.ln() / 4000.0).sqrt()).abs() < 1e-15);
        let p =
            default_parameters(2, 200, FeedbackMode::FullInformation, EtaForm::Balanced).unwrap();
        assert!((p.eta - (10f64.ln() / 400.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn short_horizon_rejected() {
        assert_eq!(
            default_parameters(2, 2, FeedbackMode::Bandit, EtaForm::Standard),
            Err(ParamError::HorizonTooShort {
                units: 2,
                horizon: 2
            })
        );
    }
}
