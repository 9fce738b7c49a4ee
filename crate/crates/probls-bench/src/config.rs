//! JSON run configuration and its validation.

use std::path::{Path, PathBuf};

use probls::driver::Mode;
use probls::objectives::ProblemSpec;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    pub mode: Mode,
    pub alpha0: f64,
    pub batch_size: usize,
    #[serde(default)]
    pub num_steps: Option<usize>,
    #[serde(default)]
    pub num_epochs: Option<usize>,
    pub seed: u64,
    #[serde(default = "default_reps")]
    pub replications: usize,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    #[serde(default = "default_budget")]
    pub budget: usize,
    /// Test hook: reuse the search-start batch within each search.
    #[serde(default)]
    pub fixed_batch_per_search: bool,
}

fn default_reps() -> usize {
    1
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_budget() -> usize {
    probls::controller::DEFAULT_BUDGET
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let config: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("cannot parse {}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.alpha0 > 0.0) {
            return Err(CliError::Config("alpha0 must be positive".into()));
        }
        if self.mode == Mode::LineSearch && self.batch_size < 2 {
            return Err(CliError::Config(
                "line-search mode needs batch_size >= 2".into(),
            ));
        }
        if self.batch_size == 0 {
            return Err(CliError::Config("batch_size must be at least 1".into()));
        }
        if self.num_steps.is_none() && self.num_epochs.is_none() {
            return Err(CliError::Config("set one of num_steps or num_epochs".into()));
        }
        if self.replications == 0 {
            return Err(CliError::Config("replications must be at least 1".into()));
        }
        Ok(())
    }

    pub fn driver_config(&self) -> probls::DriverConfig {
        let mut cfg = probls::DriverConfig::new(self.mode, self.alpha0, self.batch_size, self.seed);
        cfg.num_steps = self.num_steps;
        cfg.num_epochs = self.num_epochs;
        cfg.budget = self.budget;
        cfg.fixed_batch_per_search = self.fixed_batch_per_search;
        cfg
    }
}

pub fn parse_mode(s: &str) -> Result<Mode, CliError> {
    match s {
        "linesearch" => Ok(Mode::LineSearch),
        "sgd-fixed" => Ok(Mode::SgdFixed),
        "sgd-decay" => Ok(Mode::SgdDecay),
        other => Err(CliError::Config(format!(
            "unknown mode {other:?}; use linesearch, sgd-fixed or sgd-decay"
        ))),
    }
}

pub fn parse_alpha_list(s: &str) -> Result<Vec<f64>, CliError> {
    let alphas: Result<Vec<f64>, _> = s.split(',').map(|v| v.trim().parse::<f64>()).collect();
    let alphas =
        alphas.map_err(|e| CliError::Config(format!("cannot parse alpha list {s:?}: {e}")))?;
    if alphas.is_empty() || alphas.iter().any(|a| !(*a > 0.0)) {
        return Err(CliError::Config("alpha list must contain positive values".into()));
    }
    Ok(alphas)
}
