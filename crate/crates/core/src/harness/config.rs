//! Flat TOML experiment files.
//!
//! ```toml
//! nu = 32
//! nr = 64
//! modulation_order = 16
//! rho = 0.6
//! snr_db_list = [0, 4, 8, 12, 16]
//! batch_size = 5000
//! coherence_block = 1000          # default 1000
//! detectors = ["zf", "mmse", "langevin-low1", "overdamped-low2"]
//! seed = 7                        # default 0
//! # noise_var = 1e-12             # overrides the SNR-derived σ0²
//!
//! # Sampler fields for `langevin-custom` / `overdamped-custom`. Any subset
//! # may be given; the rest come from `custom_preset` (default "low1").
//! # custom_preset = "low1"
//! # num_levels = 5
//! # steps_per_level = 30
//! # num_trajectories = 20
//! # step_size = 6e-4
//! # friction = 1.0
//! # temperature = 0.01
//! # mass_scalar = 0.25
//! # sigma_first = 0.4
//! # sigma_last = 0.02
//! ```
//!
//! Unknown keys are rejected.

use std::path::Path;

use serde::Deserialize;

use super::ExperimentConfig;
use crate::error::{Error, Result};
use crate::langevin::LangevinConfig;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    nu: usize,
    nr: usize,
    modulation_order: usize,
    rho: f64,
    snr_db_list: Vec<f64>,
    batch_size: usize,
    #[serde(default = "default_coherence")]
    coherence_block: usize,
    detectors: Vec<String>,
    #[serde(default)]
    seed: u64,
    noise_var: Option<f64>,

    custom_preset: Option<String>,
    num_levels: Option<usize>,
    steps_per_level: Option<usize>,
    num_trajectories: Option<usize>,
    step_size: Option<f64>,
    friction: Option<f64>,
    temperature: Option<f64>,
    mass_scalar: Option<f64>,
    sigma_first: Option<f64>,
    sigma_last: Option<f64>,
}

fn default_coherence() -> usize {
    1000
}

impl ConfigFile {
    fn custom(&self) -> Result<Option<LangevinConfig>> {
        let any = self.custom_preset.is_some()
            || self.num_levels.is_some()
            || self.steps_per_level.is_some()
            || self.num_trajectories.is_some()
            || self.step_size.is_some()
            || self.friction.is_some()
            || self.temperature.is_some()
            || self.mass_scalar.is_some()
            || self.sigma_first.is_some()
            || self.sigma_last.is_some();
        if !any {
            return Ok(None);
        }
        let base = LangevinConfig::preset(self.custom_preset.as_deref().unwrap_or("low1"))?;
        let cfg = LangevinConfig {
            num_levels: self.num_levels.unwrap_or(base.num_levels),
            steps_per_level: self.steps_per_level.unwrap_or(base.steps_per_level),
            num_trajectories: self.num_trajectories.unwrap_or(base.num_trajectories),
            step_size: self.step_size.unwrap_or(base.step_size),
            friction: self.friction.unwrap_or(base.friction),
            temperature: self.temperature.unwrap_or(base.temperature),
            mass_scalar: self.mass_scalar.unwrap_or(base.mass_scalar),
            sigma_first: self.sigma_first.unwrap_or(base.sigma_first),
            sigma_last: self.sigma_last.unwrap_or(base.sigma_last),
        };
        cfg.validate()?;
        Ok(Some(cfg))
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let cfg = ExperimentConfig {
        custom_langevin: file.custom()?,
        nu: file.nu,
        nr: file.nr,
        modulation_order: file.modulation_order,
        rho: file.rho,
        snr_db_list: file.snr_db_list,
        batch_size: file.batch_size,
        coherence_block: file.coherence_block,
        detectors: file.detectors,
        seed: file.seed,
        noise_var: file.noise_var,
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}
