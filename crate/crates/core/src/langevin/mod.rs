//! Annealed Langevin detectors.
//!
//! The underdamped detector runs the kinetic Langevin dynamic directly on the
//! spectral coordinates `χ = Vᵀ x̃`, sweeping a decreasing ladder of noise
//! levels and keeping position and velocity across levels. Each level uses a
//! diagonal step matrix `Λ_l` shaped by the singular values so that the
//! effective step on every coordinate stays at `ε/σ_L²` of curvature. Several
//! independent trajectories are run and the candidate with the smallest
//! residual `‖y − Hx‖²` is kept.
//!
//! The overdamped detector uses the same annealing, score and selection with a
//! position-only update.

mod integrator;
mod sampler;

pub use integrator::{kinetic_step, overdamped_step, underdamped_step, TrajectoryState};
pub use sampler::{
    detect, detect_with_seeds, overdamped_detect, run_trajectory, Candidate, DetectionResult,
    Dynamics,
};

use crate::channel::ChannelRealization;
use crate::error::{invalid, Result};
use crate::score::NoiseSchedule;

/// Sampler hyperparameters.
///
/// `mass_scalar` is the scalar `m` of the mass matrix `M = m·I`;
/// `num_trajectories` is the number of independent chains.
#[derive(Debug, Clone, PartialEq)]
pub struct LangevinConfig {
    pub num_levels: usize,
    pub steps_per_level: usize,
    pub num_trajectories: usize,
    pub step_size: f64,
    pub friction: f64,
    pub temperature: f64,
    pub mass_scalar: f64,
    pub sigma_first: f64,
    pub sigma_last: f64,
}

/// Names accepted by [`LangevinConfig::preset`].
pub const PRESET_NAMES: [&str; 3] = ["low1", "low2", "high"];

impl LangevinConfig {
    /// Friction 1 with mass `γ²/4` shared by every preset.
    const FRICTION: f64 = 1.0;
    const MASS: f64 = Self::FRICTION * Self::FRICTION / 4.0;

    /// 5 levels from 0.4 to 0.02, 30 steps each, τ = 0.01, ε = 6e-4.
    pub fn low1() -> Self {
        Self {
            num_levels: 5,
            steps_per_level: 30,
            num_trajectories: 20,
            step_size: 6e-4,
            friction: Self::FRICTION,
            temperature: 0.01,
            mass_scalar: Self::MASS,
            sigma_first: 0.4,
            sigma_last: 0.02,
        }
    }

    /// 5 levels from 1 to 0.01, 30 steps each, τ = 0.1, ε = 3e-5.
    pub fn low2() -> Self {
        Self {
            num_levels: 5,
            steps_per_level: 30,
            num_trajectories: 20,
            step_size: 3e-5,
            friction: Self::FRICTION,
            temperature: 0.1,
            mass_scalar: Self::MASS,
            sigma_first: 1.0,
            sigma_last: 0.01,
        }
    }

    /// `low2` stretched to 20 levels of 70 steps with τ = 0.5.
    pub fn high() -> Self {
        Self {
            num_levels: 20,
            steps_per_level: 70,
            temperature: 0.5,
            ..Self::low2()
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "low1" => Ok(Self::low1()),
            "low2" => Ok(Self::low2()),
            "high" => Ok(Self::high()),
            other => Err(invalid(format!(
                "unknown preset `{other}` (expected one of {PRESET_NAMES:?})"
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_levels == 0 || self.num_trajectories == 0 {
            return Err(invalid("num_levels and num_trajectories must be >= 1"));
        }
        for (name, v) in [
            ("step_size", self.step_size),
            ("friction", self.friction),
            ("temperature", self.temperature),
            ("mass_scalar", self.mass_scalar),
            ("sigma_last", self.sigma_last),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.sigma_first.is_finite() && self.sigma_first > self.sigma_last) {
            return Err(invalid(format!(
                "sigma_first ({}) must exceed sigma_last ({})",
                self.sigma_first, self.sigma_last
            )));
        }
        Ok(())
    }

    /// `σ_L`, the last level of the schedule built from this config.
    pub fn terminal_sigma(&self) -> f64 {
        if self.num_levels == 1 {
            self.sigma_first
        } else {
            self.sigma_last
        }
    }

    /// Score evaluations spent by one trajectory.
    pub fn iterations(&self) -> usize {
        self.num_levels * self.steps_per_level
    }
}

/// Geometric ladder from `sigma_first` down to `sigma_last`.
pub fn make_schedule(cfg: &LangevinConfig) -> Result<NoiseSchedule> {
    cfg.validate()?;
    let l = cfg.num_levels;
    if l == 1 {
        return NoiseSchedule::new(vec![cfg.sigma_first]);
    }
    let ratio = cfg.sigma_last / cfg.sigma_first;
    let mut levels: Vec<f64> = (0..l)
        .map(|i| cfg.sigma_first * ratio.powf(i as f64 / (l - 1) as f64))
        .collect();
    levels[l - 1] = cfg.sigma_last;
    NoiseSchedule::new(levels)
}

/// Diagonal of the per-level step matrix `Λ_l`.
///
/// With `σ0'` the per-real-coordinate noise std:
/// `(ε σ_l²/σ_L²)(1 − σ_l² s_j²/σ0'²)` when `σ_l s_j ≤ σ0'`, otherwise
/// `(ε/σ_L²)(σ_l² − σ0'²/s_j²)`. Zero singular values take the first branch.
pub fn step_matrix(
    sigma_l: f64,
    schedule: &NoiseSchedule,
    chan: &ChannelRealization,
    cfg: &LangevinConfig,
) -> Vec<f64> {
    let last_var = schedule.last().powi(2);
    let base = cfg.step_size / last_var;
    let nv = chan.real_noise_var();
    let std = chan.real_noise_std();
    let lv = sigma_l * sigma_l;
    chan.singular_values()
        .iter()
        .map(|&s| {
            if s == 0.0 {
                base * lv
            } else if sigma_l * s <= std {
                base * lv * (1.0 - lv * s * s / nv)
            } else {
                base * (lv - nv / (s * s))
            }
        })
        .collect()
}
