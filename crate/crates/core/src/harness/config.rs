//! Run configuration from `key=value` pairs.
//!
//! Keys match the command-line flag names without the leading dashes. A
//! config file holds one pair per line; blank lines and lines starting with
//! `#` are skipped.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::adversary::AdversarySpec;
use crate::auction::{PricingRule, Valuation};
use crate::grid::Grid;
use crate::learner::{default_parameters, EtaForm, FeedbackMode, ParamError, Parameters};

pub const KEYS: &[&str] = &[
    "units",
    "horizon",
    "feedback",
    "pricing",
    "values",
    "adversary",
    "epsilon",
    "eta",
    "eta-form",
    "seed",
    "reps",
    "tie-mode",
    "out",
    "plot",
    "scale",
    "workers",
];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("missing required key `{0}`")]
    MissingKey(&'static str),
    #[error("invalid value `{value}` for `{key}`: {reason}")]
    InvalidValue {
        key: String,
        value: String,
        reason: String,
    },
    #[error("line {line}: expected `key=value`")]
    Syntax { line: usize },
    #[error("learning runs need lab pricing; use the clear command for frb")]
    FrbLearning,
    #[error(transparent)]
    Parameters(#[from] ParamError),
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieMode {
    /// Adversary bids must avoid the grid.
    #[default]
    Validate,
    /// The learner's grid is shifted by a small random offset each run.
    Perturb,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scale {
    #[default]
    Linear,
    LogLog,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub units: u32,
    pub horizon: u64,
    pub feedback: FeedbackMode,
    pub pricing: PricingRule,
    pub values: Valuation,
    pub adversary: AdversarySpec,
    pub epsilon: Option<f64>,
    pub eta: Option<f64>,
    pub eta_form: EtaForm,
    pub seed: u64,
    pub replications: u32,
    pub tie_mode: TieMode,
    pub out: Option<PathBuf>,
    pub plot: Option<PathBuf>,
    pub scale: Scale,
    pub workers: Option<usize>,
}

/// Parses `key=value` lines.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut pairs = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or(ConfigError::Syntax { line: i + 1 })?;
        let key = key.trim().trim_start_matches("--").to_string();
        if !KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey(key));
        }
        pairs.insert(key, value.trim().to_string());
    }
    Ok(pairs)
}

pub fn read_pairs(path: &Path) -> Result<BTreeMap<String, String>, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_pairs(&text)
}

fn invalid(key: &str, value: &str, reason: impl ToString) -> ConfigError {
    ConfigError::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: reason.to_string(),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| invalid(key, value, e))
}

pub fn parse_feedback(value: &str) -> Result<FeedbackMode, ConfigError> {
    match value {
        "full" => Ok(FeedbackMode::FullInformation),
        "bandit" => Ok(FeedbackMode::Bandit),
        "allwinner" => Ok(FeedbackMode::AllWinner),
        _ => Err(invalid(
            "feedback",
            value,
            "expected full, bandit or allwinner",
        )),
    }
}

pub fn parse_pricing(value: &str) -> Result<PricingRule, ConfigError> {
    match value {
        "lab" => Ok(PricingRule::Lab),
        "frb" => Ok(PricingRule::Frb),
        _ => Err(invalid("pricing", value, "expected lab or frb")),
    }
}

/// Comma-separated reals.
pub fn parse_reals(key: &str, value: &str) -> Result<Vec<f64>, ConfigError> {
    value.split(',').map(|t| parse_num(key, t.trim())).collect()
}

impl RunConfig {
    /// Builds and validates a config. Unknown keys are rejected.
    pub fn from_pairs(pairs: &BTreeMap<String, String>) -> Result<Self, ConfigError> {
        if let Some(key) = pairs.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(ConfigError::UnknownKey(key.clone()));
        }
        let get = |key: &'static str| pairs.get(key).map(String::as_str);
        let require = |key: &'static str| get(key).ok_or(ConfigError::MissingKey(key));

        let units: u32 = parse_num("units", require("units")?)?;
        if units == 0 {
            return Err(invalid("units", "0", "need at least one unit"));
        }
        let horizon: u64 = parse_num("horizon", require("horizon")?)?;
        if horizon == 0 {
            return Err(invalid("horizon", "0", "need at least one round"));
        }
        let feedback = parse_feedback(require("feedback")?)?;
        let pricing = get("pricing").map_or(Ok(PricingRule::Lab), parse_pricing)?;
        if pricing == PricingRule::Frb {
            return Err(ConfigError::FrbLearning);
        }
        let raw_values = require("values")?;
        let values = Valuation::new(parse_reals("values", raw_values)?)
            .map_err(|e| invalid("values", raw_values, e))?;
        if values.units() != units as usize {
            return Err(invalid(
                "values",
                raw_values,
                format!("expected {units} values"),
            ));
        }
        let raw_adv = require("adversary")?;
        let adversary: AdversarySpec = raw_adv
            .parse()
            .map_err(|e| invalid("adversary", raw_adv, e))?;

        let epsilon = get("epsilon")
            .map(|v| {
                let eps: f64 = parse_num("epsilon", v)?;
                Grid::from_epsilon(eps).map_err(|e| invalid("epsilon", v, e))?;
                Ok::<_, ConfigError>(eps)
            })
            .transpose()?;
        let eta = get("eta")
            .map(|v| {
                let eta: f64 = parse_num("eta", v)?;
                if !(eta > 0.0 && eta.is_finite()) {
                    return Err(invalid("eta", v, "must be positive"));
                }
                Ok(eta)
            })
            .transpose()?;
        let eta_form = match get("eta-form") {
            None | Some("standard") => EtaForm::Standard,
            Some("balanced") => EtaForm::Balanced,
            Some(v) => return Err(invalid("eta-form", v, "expected standard or balanced")),
        };
        let seed = get("seed").map_or(Ok(0), |v| parse_num("seed", v))?;
        let replications: u32 = get("reps").map_or(Ok(1), |v| parse_num("reps", v))?;
        if replications == 0 {
            return Err(invalid("reps", "0", "need at least one replication"));
        }
        let tie_mode = match get("tie-mode") {
            None | Some("validate") => TieMode::Validate,
            Some("perturb") => TieMode::Perturb,
            Some(v) => return Err(invalid("tie-mode", v, "expected validate or perturb")),
        };
        let scale = match get("scale") {
            None | Some("linear") => Scale::Linear,
            Some("loglog") => Scale::LogLog,
            Some(v) => return Err(invalid("scale", v, "expected linear or loglog")),
        };
        let workers = get("workers")
            .map(|v| match parse_num::<usize>("workers", v)? {
                0 => Err(invalid("workers", v, "need at least one worker")),
                n => Ok(n),
            })
            .transpose()?;

        let config = Self {
            units,
            horizon,
            feedback,
            pricing,
            values,
            adversary,
            epsilon,
            eta,
            eta_form,
            seed,
            replications,
            tie_mode,
            out: get("out").map(PathBuf::from),
            plot: get("plot").map(PathBuf::from),
            scale,
            workers,
        };
        config.parameters()?;
        Ok(config)
    }

    /// Grid size and learning rate: overrides where given, horizon-tuned
    /// defaults otherwise.
    pub fn parameters(&self) -> Result<Parameters, ConfigError> {
        let override_inv = self
            .epsilon
            .map(|e| Grid::from_epsilon(e).expect("validated").inv_epsilon());
        if let (Some(inv_epsilon), Some(eta)) = (override_inv, self.eta) {
            return Ok(Parameters { inv_epsilon, eta });
        }
        let defaults = default_parameters(self.units, self.horizon, self.feedback, self.eta_form)?;
        Ok(Parameters {
            inv_epsilon: override_inv.unwrap_or(defaults.inv_epsilon),
            eta: self.eta.unwrap_or(defaults.eta),
        })
    }
}
