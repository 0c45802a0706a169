//! Single-trajectory integrator steps.
//!
//! The kinetic step is the splitting `A B O`: a position drift with the
//! current velocity, a velocity kick with the score at the new position, and
//! an exact Ornstein-Uhlenbeck relaxation of the velocity.

use rand::Rng;
use rand_distr::StandardNormal;

use super::LangevinConfig;

/// Position and velocity of one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryState {
    pub chi: Vec<f64>,
    pub velocity: Vec<f64>,
    pub level: usize,
    pub step: usize,
}

impl TrajectoryState {
    /// State at `chi` with zero velocity.
    pub fn at_rest(chi: Vec<f64>) -> Self {
        let n = chi.len();
        Self {
            chi,
            velocity: vec![0.0; n],
            level: 0,
            step: 0,
        }
    }
}

/// Scalars of one `A B O` step for time step `h`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct KineticCoefficients {
    /// `h/m`
    pub drift: f64,
    /// `e^{−γh}`
    pub decay: f64,
    /// `√(τ(1 − e^{−2γh}))·√m`
    pub noise: f64,
}

impl KineticCoefficients {
    pub fn new(cfg: &LangevinConfig, h: f64) -> Self {
        let decay = (-cfg.friction * h).exp();
        let noise = (cfg.temperature * (1.0 - (-2.0 * cfg.friction * h).exp())).sqrt()
            * cfg.mass_scalar.sqrt();
        Self {
            drift: h / cfg.mass_scalar,
            decay,
            noise,
        }
    }

    /// Time step of the annealed sampler, `ε/σ_L²`.
    pub fn annealed(cfg: &LangevinConfig) -> Self {
        Self::new(cfg, cfg.step_size / cfg.terminal_sigma().powi(2))
    }
}

#[inline]
pub(crate) fn drift(chi: &mut [f64], velocity: &[f64], k: &KineticCoefficients) {
    for (x, v) in chi.iter_mut().zip(velocity) {
        *x += k.drift * v;
    }
}

/// Kick then relax; `shape[j]` multiplies the injected noise on coordinate `j`.
#[inline]
pub(crate) fn kick_relax(
    velocity: &mut [f64],
    kick: &[f64],
    score: &[f64],
    shape: &[f64],
    noise: &[f64],
    k: &KineticCoefficients,
) {
    for j in 0..velocity.len() {
        let half = velocity[j] + kick[j] * score[j];
        velocity[j] = k.decay * half + k.noise * shape[j] * noise[j];
    }
}

#[inline]
pub(crate) fn overdamped_update(
    chi: &mut [f64],
    step: &[f64],
    noise_gain: &[f64],
    score: &[f64],
    noise: &[f64],
) {
    for j in 0..chi.len() {
        chi[j] += step[j] * score[j] + noise_gain[j] * noise[j];
    }
}

pub(crate) fn fill_normal<R: Rng + ?Sized>(buf: &mut [f64], rng: &mut R) {
    for w in buf.iter_mut() {
        *w = rng.sample(StandardNormal);
    }
}

/// One annealed underdamped step with step matrix `lambda`.
///
/// `score(chi, out)` writes the score at `chi` into `out`; it is called once,
/// at the drifted position. The time step is `ε/σ_L²`, and the injected
/// noise is shaped by `lambda` as in the annealed algorithm.
pub fn underdamped_step<F, R>(
    state: &mut TrajectoryState,
    mut score: F,
    lambda: &[f64],
    cfg: &LangevinConfig,
    rng: &mut R,
) where
    F: FnMut(&[f64], &mut [f64]),
    R: Rng + ?Sized,
{
    let k = KineticCoefficients::annealed(cfg);
    let n = state.chi.len();
    let mut g = vec![0.0; n];
    let mut w = vec![0.0; n];
    drift(&mut state.chi, &state.velocity, &k);
    score(&state.chi, &mut g);
    fill_normal(&mut w, rng);
    kick_relax(&mut state.velocity, lambda, &g, lambda, &w, &k);
    state.step += 1;
}

/// Plain kinetic Langevin step with time step `ε` and unit noise shaping:
/// `x += ε v/m`, `v += ε ∇log p(x)`, then the OU relaxation. Its invariant
/// law in position is `p^{1/τ}`.
pub fn kinetic_step<F, R>(
    state: &mut TrajectoryState,
    mut score: F,
    cfg: &LangevinConfig,
    rng: &mut R,
) where
    F: FnMut(&[f64], &mut [f64]),
    R: Rng + ?Sized,
{
    let k = KineticCoefficients::new(cfg, cfg.step_size);
    let n = state.chi.len();
    let mut g = vec![0.0; n];
    let mut w = vec![0.0; n];
    let kick = vec![cfg.step_size; n];
    let ones = vec![1.0; n];
    drift(&mut state.chi, &state.velocity, &k);
    score(&state.chi, &mut g);
    fill_normal(&mut w, rng);
    kick_relax(&mut state.velocity, &kick, &g, &ones, &w, &k);
    state.step += 1;
}

/// One annealed overdamped step: `χ += Λ ∇ + √(2τΛ) w`.
pub fn overdamped_step<F, R>(
    state: &mut TrajectoryState,
    mut score: F,
    lambda: &[f64],
    cfg: &LangevinConfig,
    rng: &mut R,
) where
    F: FnMut(&[f64], &mut [f64]),
    R: Rng + ?Sized,
{
    let n = state.chi.len();
    let mut g = vec![0.0; n];
    let mut w = vec![0.0; n];
    let gain: Vec<f64> = lambda
        .iter()
        .map(|l| (2.0 * cfg.temperature * l).sqrt())
        .collect();
    score(&state.chi, &mut g);
    fill_normal(&mut w, rng);
    overdamped_update(&mut state.chi, lambda, &gain, &g, &w);
    state.step += 1;
}
