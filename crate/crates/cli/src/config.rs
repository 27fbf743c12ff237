//! JSON run configuration, validated before any computation.

use std::fs;
use std::path::{Path, PathBuf};

use renewal_percolation::{QSequence, RadiusModel, TailMethod};
use serde::{Deserialize, Serialize};

use crate::CliError;

fn default_horizon() -> usize {
    1_000
}

fn default_n() -> usize {
    8
}

fn default_reps() -> u64 {
    100_000
}

fn default_tail() -> TailMethod {
    TailMethod::Concentration
}

fn default_delays() -> Vec<usize> {
    vec![0, 1]
}

fn default_coupling_horizon() -> usize {
    12
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Battery {
    #[serde(default = "Battery::default_size")]
    pub size: usize,
    #[serde(default = "Battery::default_seed")]
    pub seed: u64,
    #[serde(default = "Battery::default_max_n")]
    pub max_n: usize,
    #[serde(default = "Battery::default_max_support")]
    pub max_support: usize,
    /// Monte Carlo replicates per battery config.
    #[serde(default = "Battery::default_reps")]
    pub reps: u64,
}

impl Battery {
    fn default_size() -> usize {
        50
    }
    fn default_seed() -> u64 {
        7
    }
    fn default_max_n() -> usize {
        8
    }
    fn default_max_support() -> usize {
        4
    }
    fn default_reps() -> u64 {
        20_000
    }
}

impl Default for Battery {
    fn default() -> Self {
        Self {
            size: Self::default_size(),
            seed: Self::default_seed(),
            max_n: Self::default_max_n(),
            max_support: Self::default_max_support(),
            reps: Self::default_reps(),
        }
    }
}

/// Cartesian product of q fragments and radius fragments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub q: Vec<QSequence<f64>>,
    pub radius: Vec<RadiusModel<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<QSequence<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<RadiusModel<f64>>,
    /// `N` for the exact engine, bounds and sweeps.
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    /// Site index for simulation and verification.
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_reps")]
    pub reps: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_tail")]
    pub tail: TailMethod,
    /// Truncation of the dual occupancy sequence written by `exact`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual_horizon: Option<usize>,
    #[serde(default = "default_delays")]
    pub delays: Vec<usize>,
    #[serde(default = "default_coupling_horizon")]
    pub coupling_horizon: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub battery: Option<Battery>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty config is valid")
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: &str| Err(CliError::Validation(msg.to_string()));
        if self.horizon < 2 {
            return bad("horizon must be at least 2");
        }
        if self.reps < 1 {
            return bad("reps must be at least 1");
        }
        if self.delays.is_empty() {
            return bad("delays must be nonempty");
        }
        if self.coupling_horizon <= self.delays.iter().copied().max().unwrap_or(0) {
            return bad("coupling_horizon must exceed every delay");
        }
        if let Some(b) = &self.battery {
            if b.max_n < 1 || b.max_n > renewal_percolation::oracle::MAX_CONNECTIVITY_SITES {
                return bad("battery.max_n must lie in 1..=8");
            }
            if b.reps < 1 {
                return bad("battery.reps must be at least 1");
            }
        }
        Ok(())
    }

    pub fn model(&self) -> Result<(&QSequence<f64>, &RadiusModel<f64>), CliError> {
        match (&self.q, &self.radius) {
            (Some(q), Some(r)) => Ok((q, r)),
            _ => Err(CliError::Usage(
                "config must provide both `q` and `radius`".into(),
            )),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serialises")
    }
}
