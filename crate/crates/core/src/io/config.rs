//! TOML run configuration.
//!
//! Every key is optional and falls back to the defaults of the simulated
//! setup; unknown keys are rejected.
//!
//! ```toml
//! trials = 1000
//! seed = 42
//! gamma_sweep = [10, 20, 30, 40, 50, 60, 70, 80]
//! algorithms = ["vision", "range", "fused", "fused_ridge"]
//!
//! [scenario]
//! height = 2000.0
//! slant_range = 5000.0
//!
//! [noise]
//! range_sigma = 2.5
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{io_err, IoError, IoResult};
use crate::fusion::FusionOptions;
use crate::pipeline::{Algorithm, LocalizationConfig};
use crate::ridge::RidgeConfig;
use crate::sim::{NoiseSpec, ScenarioSpec};
use crate::solver::SolverConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub trials: usize,
    pub seed: u64,
    /// Intersection angles to sweep, degrees.
    pub gamma_sweep: Vec<f64>,
    pub algorithms: Vec<Algorithm>,
    pub scenario: ScenarioSpec,
    pub noise: NoiseSpec,
    pub solver: SolverConfig,
    pub ridge: RidgeConfig,
    pub fusion: FusionOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            trials: 1000,
            seed: 0,
            gamma_sweep: (1..=8).map(|i| 10.0 * i as f64).collect(),
            algorithms: vec![
                Algorithm::Vision,
                Algorithm::Range,
                Algorithm::Fused,
                Algorithm::FusedRidge,
            ],
            scenario: ScenarioSpec::default(),
            noise: NoiseSpec::default(),
            solver: SolverConfig::default(),
            ridge: RidgeConfig::default(),
            fusion: FusionOptions::default(),
        }
    }
}

fn out_of_range(field: &str, message: impl Into<String>) -> IoError {
    IoError::OutOfRange {
        field: field.to_string(),
        message: message.into(),
    }
}

impl RunConfig {
    pub fn validate(&self) -> IoResult<()> {
        if self.trials < 1 {
            return Err(out_of_range("trials", "must be >= 1"));
        }
        if self.seed > i64::MAX as u64 {
            return Err(out_of_range("seed", "must fit a signed 64-bit integer"));
        }
        if self.gamma_sweep.is_empty() {
            return Err(out_of_range("gamma_sweep", "must not be empty"));
        }
        if let Some(g) = self.gamma_sweep.iter().find(|g| !(**g > 0.0 && **g < 180.0)) {
            return Err(out_of_range("gamma_sweep", format!("{g} is outside (0, 180)")));
        }
        if self.algorithms.is_empty() {
            return Err(out_of_range("algorithms", "must not be empty"));
        }
        let mut algos = self.algorithms.clone();
        algos.sort();
        algos.dedup();
        if algos.len() != self.algorithms.len() {
            return Err(out_of_range("algorithms", "contains duplicates"));
        }
        let sections: [(&str, crate::error::Result<()>); 4] = [
            ("scenario", self.scenario.validate()),
            ("noise", self.noise.validate()),
            ("solver", self.solver.validate()),
            ("ridge", self.ridge.validate()),
        ];
        for (field, check) in sections {
            check.map_err(|e| out_of_range(field, e.to_string()))?;
        }
        Ok(())
    }

    pub fn localization(&self) -> LocalizationConfig {
        LocalizationConfig {
            solver: self.solver,
            ridge: self.ridge,
            fusion: self.fusion,
        }
    }
}

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn unknown_key(message: &str) -> Option<String> {
    let rest = message.split("unknown field `").nth(1)?;
    rest.split('`').next().map(str::to_string)
}

pub fn parse_config_str(text: &str) -> IoResult<RunConfig> {
    let config: RunConfig = toml::from_str(text).map_err(|e| {
        if let Some(key) = unknown_key(e.message()) {
            return IoError::UnknownKey(key);
        }
        let (line, column) = e.span().map_or((0, 0), |s| line_column(text, s.start));
        IoError::Parse {
            line,
            column,
            message: e.message().trim().to_string(),
        }
    })?;
    config.validate()?;
    Ok(config)
}

pub fn parse_config(path: &Path) -> IoResult<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    parse_config_str(&text)
}

pub fn serialize_config(config: &RunConfig) -> IoResult<String> {
    toml::to_string(config).map_err(|e| IoError::InsufficientData(format!("cannot serialize config: {e}")))
}
