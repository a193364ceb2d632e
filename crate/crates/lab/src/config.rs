//! Simulation configuration and the `key = value` file format.
//!
//! Keys mirror the field names: `L`, `rho`, `b`, `p_d`, `alpha`, `gamma`,
//! `epsilon`, `action_set`, `n_mcs`, `replicas`, `tail_fraction`, `seed`,
//! `init_mode` and `failed_move`. Defaults for `epsilon` and `n_mcs` depend on
//! the action set, so settings are resolved in two passes: the action set
//! first, then everything else on top of that set's defaults.

use std::fmt;
use std::path::Path;

use dilemma_core::dynamics::{FailedMove, InitMode, Rules};
use dilemma_core::game::PayoffParams;
use dilemma_core::learning::{ActionSet, LearningParams};
use dilemma_core::ParamError;

use crate::error::ConfigError;

pub const KEYS: [&str; 14] = [
    "action_set",
    "L",
    "rho",
    "b",
    "p_d",
    "alpha",
    "gamma",
    "epsilon",
    "n_mcs",
    "replicas",
    "tail_fraction",
    "seed",
    "init_mode",
    "failed_move",
];

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub side: usize,
    pub rho: f64,
    pub b: f64,
    pub p_d: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub action_set: ActionSet,
    pub n_mcs: u64,
    pub replicas: usize,
    pub tail_fraction: f64,
    pub seed: u64,
    pub init_mode: InitMode,
    pub failed_move: FailedMove,
}

impl SimConfig {
    /// Defaults of the no-knowledge sets (static, mobile) and of the
    /// exploring-action sets (best, persist-best).
    pub fn for_action_set(action_set: ActionSet) -> Self {
        let (epsilon, n_mcs) = if action_set.has_strategy_actions() {
            (0.02, 20_000)
        } else {
            (0.15, 100_000)
        };
        SimConfig {
            side: 100,
            rho: 1.0,
            b: 1.4,
            p_d: 0.0,
            alpha: 0.75,
            gamma: 0.8,
            epsilon,
            action_set,
            n_mcs,
            replicas: 10,
            tail_fraction: 0.1,
            seed: 0,
            init_mode: InitMode::Random,
            failed_move: FailedMove::Skip,
        }
    }

    /// Builds a configuration from ordered `(key, value)` pairs. Later pairs
    /// win, so passing file pairs before command-line pairs gives the
    /// command line precedence.
    pub fn resolve<K, V>(pairs: &[(K, V)]) -> Result<Self, ConfigError>
    where
        K: AsRef<str>,
        V: AsRef<str>,
    {
        let mut set = ActionSet::Static;
        for (k, v) in pairs {
            if canonical_key(k.as_ref()) == Some("action_set") {
                set = parse_value("action_set", v.as_ref())?;
            }
        }
        let mut config = SimConfig::for_action_set(set);
        for (k, v) in pairs {
            config.set(k.as_ref(), v.as_ref())?;
        }
        Ok(config)
    }

    /// Sets one field from its textual form. Setting `action_set` here does
    /// not touch the set-dependent defaults; use [`SimConfig::resolve`] for
    /// that.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let key = canonical_key(key).ok_or_else(|| ConfigError::UnknownKey(key.to_string()))?;
        match key {
            "action_set" => self.action_set = parse_value(key, value)?,
            "L" => self.side = parse_value(key, value)?,
            "rho" => self.rho = parse_value(key, value)?,
            "b" => self.b = parse_value(key, value)?,
            "p_d" => self.p_d = parse_value(key, value)?,
            "alpha" => self.alpha = parse_value(key, value)?,
            "gamma" => self.gamma = parse_value(key, value)?,
            "epsilon" => self.epsilon = parse_value(key, value)?,
            "n_mcs" => self.n_mcs = parse_count(key, value)?,
            "replicas" => self.replicas = parse_count(key, value)? as usize,
            "tail_fraction" => self.tail_fraction = parse_value(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            "init_mode" => {
                self.init_mode = match value.trim().to_ascii_lowercase().as_str() {
                    "random" => InitMode::Random,
                    "striped" => InitMode::Striped,
                    _ => return Err(bad_value(key, value)),
                }
            }
            "failed_move" => {
                self.failed_move = match value.trim().to_ascii_lowercase().as_str() {
                    "skip" => FailedMove::Skip,
                    "learn-zero" | "learn_zero" => FailedMove::LearnZero,
                    _ => return Err(bad_value(key, value)),
                }
            }
            _ => unreachable!("canonical key {key}"),
        }
        Ok(())
    }

    /// All fields as `(key, value)` pairs in [`KEYS`] order. Feeding them back
    /// into [`SimConfig::resolve`] reproduces `self`.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        vec![
            ("action_set", self.action_set.name().to_string()),
            ("L", self.side.to_string()),
            ("rho", self.rho.to_string()),
            ("b", self.b.to_string()),
            ("p_d", self.p_d.to_string()),
            ("alpha", self.alpha.to_string()),
            ("gamma", self.gamma.to_string()),
            ("epsilon", self.epsilon.to_string()),
            ("n_mcs", self.n_mcs.to_string()),
            ("replicas", self.replicas.to_string()),
            ("tail_fraction", self.tail_fraction.to_string()),
            ("seed", self.seed.to_string()),
            (
                "init_mode",
                match self.init_mode {
                    InitMode::Random => "random",
                    InitMode::Striped => "striped",
                }
                .to_string(),
            ),
            (
                "failed_move",
                match self.failed_move {
                    FailedMove::Skip => "skip",
                    FailedMove::LearnZero => "learn-zero",
                }
                .to_string(),
            ),
        ]
    }

    /// Checks every range and returns the model rules.
    pub fn validate(&self) -> Result<Rules, ConfigError> {
        if self.side < 2 {
            return Err(ParamError::Side(self.side).into());
        }
        if !(self.rho > 0.0 && self.rho <= 1.0) {
            return Err(ParamError::Density(self.rho).into());
        }
        if self.n_mcs == 0 {
            return Err(ConfigError::Zero("n_mcs"));
        }
        if self.replicas == 0 {
            return Err(ConfigError::Zero("replicas"));
        }
        if !(self.tail_fraction > 0.0 && self.tail_fraction <= 1.0) {
            return Err(ConfigError::TailFraction(self.tail_fraction));
        }
        let payoff = PayoffParams::new(self.b)?;
        let learning = LearningParams::new(self.alpha, self.gamma, self.epsilon)?;
        let rules = Rules::new(self.action_set, payoff, learning, self.p_d)?;
        Ok(rules.with_failed_move(self.failed_move))
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        SimConfig {
            seed,
            ..self.clone()
        }
    }

    /// Reads a `key = value` file.
    pub fn read_pairs(path: &Path) -> Result<Vec<(String, String)>, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        parse_pairs(&text)
    }
}

impl fmt::Display for SimConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, v) in self.to_pairs() {
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{k}={v}")?;
            first = false;
        }
        Ok(())
    }
}

/// Parses `key = value` lines. Blank lines and `#` comments are ignored.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: i + 1,
            content: raw.to_string(),
        })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

pub fn canonical_key(key: &str) -> Option<&'static str> {
    let key = key.trim().trim_start_matches("--").replace('-', "_");
    if key == "L" || key == "l" || key == "side" {
        return Some("L");
    }
    KEYS.iter().copied().find(|k| *k == key)
}

fn bad_value(key: &str, value: &str) -> ConfigError {
    ConfigError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.trim().parse().map_err(|_| bad_value(key, value))
}

/// Integer counts, also accepting scientific notation such as `2e4`.
fn parse_count(key: &str, value: &str) -> Result<u64, ConfigError> {
    let v = value.trim();
    if let Ok(n) = v.parse::<u64>() {
        return Ok(n);
    }
    match v.parse::<f64>() {
        Ok(x) if x >= 0.0 && x.fract() == 0.0 && x <= u64::MAX as f64 => Ok(x as u64),
        _ => Err(bad_value(key, value)),
    }
}
