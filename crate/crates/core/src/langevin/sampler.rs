use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::integrator::{drift, fill_normal, kick_relax, overdamped_update, KineticCoefficients};
use super::{make_schedule, step_matrix, LangevinConfig};
use crate::channel::{ChannelRealization, Observation};
use crate::constellation::{to_real_lift, Constellation};
use crate::error::{dim, Result};
use crate::linalg::gemm_nn;
use crate::score::{LevelScore, ScoreWorkspace};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dynamics {
    Underdamped,
    Overdamped,
}

/// A rounded trajectory endpoint and its residual `‖y − Hx‖²`.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub symbols: Vec<Complex64>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    pub symbols: Vec<Complex64>,
    pub residual: f64,
    pub candidates: Vec<Candidate>,
    /// Score evaluations per trajectory.
    pub score_evaluations: usize,
}

impl DetectionResult {
    /// Keeps the first candidate with the smallest residual.
    pub fn select(candidates: Vec<Candidate>, score_evaluations: usize) -> Self {
        let best = candidates.iter().enumerate().fold(0, |b, (i, c)| {
            if c.residual < candidates[b].residual {
                i
            } else {
                b
            }
        });
        Self {
            symbols: candidates[best].symbols.clone(),
            residual: candidates[best].residual,
            candidates,
            score_evaluations,
        }
    }
}

fn check_inputs(obs: &Observation, chan: &ChannelRealization) -> Result<()> {
    let rows = chan.h_real().nrows();
    if obs.y_real.len() != rows || obs.eta.len() != rows {
        return Err(dim(format!(
            "observation has length {}, channel expects {rows}",
            obs.y_real.len()
        )));
    }
    Ok(())
}

/// Runs one chain per seed side by side. Column `t` of the returned matrix is
/// the final spectral position of the chain seeded with `seeds[t]`; it does
/// not depend on the other seeds.
pub(crate) fn run_chains(
    obs: &Observation,
    chan: &ChannelRealization,
    c: &Constellation,
    cfg: &LangevinConfig,
    seeds: &[u64],
    dynamics: Dynamics,
) -> Result<(DMatrix<f64>, usize)> {
    check_inputs(obs, chan)?;
    let schedule = make_schedule(cfg)?;
    let n = chan.h_real().ncols();
    let m = seeds.len();
    let mut rngs: Vec<ChaCha8Rng> = seeds
        .iter()
        .map(|&s| ChaCha8Rng::seed_from_u64(s))
        .collect();
    let mut ws = ScoreWorkspace::new(n, m);
    for (t, rng) in rngs.iter_mut().enumerate() {
        for x in ws.position.column_mut(t).iter_mut() {
            *x = rng.gen_range(-1.0..=1.0);
        }
    }
    let mut velocity = DMatrix::<f64>::zeros(n, m);
    let mut noise = vec![0.0; n];
    let kinetic = KineticCoefficients::annealed(cfg);
    let eta = obs.eta.as_slice();
    let mut evaluations = 0;

    for &sigma in schedule.levels() {
        let lambda = step_matrix(sigma, &schedule, chan, cfg);
        let level = LevelScore::new(chan, sigma);
        let od_gain: Vec<f64> = lambda
            .iter()
            .map(|l| (2.0 * cfg.temperature * l).sqrt())
            .collect();
        for _ in 0..cfg.steps_per_level {
            match dynamics {
                Dynamics::Underdamped => {
                    for t in 0..m {
                        drift(
                            ws.position.column_mut(t).as_mut_slice(),
                            velocity.column(t).as_slice(),
                            &kinetic,
                        );
                    }
                    ws.evaluate(chan, eta, &level, c);
                    for (t, rng) in rngs.iter_mut().enumerate() {
                        fill_normal(&mut noise, rng);
                        kick_relax(
                            velocity.column_mut(t).as_mut_slice(),
                            &lambda,
                            ws.score.column(t).as_slice(),
                            &lambda,
                            &noise,
                            &kinetic,
                        );
                    }
                }
                Dynamics::Overdamped => {
                    ws.evaluate(chan, eta, &level, c);
                    for (t, rng) in rngs.iter_mut().enumerate() {
                        fill_normal(&mut noise, rng);
                        let score = ws.score.column(t).clone_owned();
                        overdamped_update(
                            ws.position.column_mut(t).as_mut_slice(),
                            &lambda,
                            &od_gain,
                            score.as_slice(),
                            &noise,
                        );
                    }
                }
            }
            evaluations += 1;
        }
    }
    Ok((ws.position, evaluations))
}

fn candidates_from(
    positions: &DMatrix<f64>,
    obs: &Observation,
    chan: &ChannelRealization,
    c: &Constellation,
) -> Vec<Candidate> {
    let mut x = DMatrix::zeros(positions.nrows(), positions.ncols());
    gemm_nn(chan.svd_v(), positions, &mut x);
    x.column_iter()
        .map(|col| {
            let symbols = c.round_real_lift(col.as_slice());
            let residual = chan.residual(&obs.y_real, &to_real_lift(&symbols));
            Candidate { symbols, residual }
        })
        .collect()
}

/// One chain of the annealed underdamped sampler, rounded to the
/// constellation. Consumes a single `u64` from `rng` as the chain's seed.
pub fn run_trajectory<R: Rng + ?Sized>(
    obs: &Observation,
    chan: &ChannelRealization,
    c: &Constellation,
    cfg: &LangevinConfig,
    rng: &mut R,
) -> Result<Candidate> {
    let seed = rng.gen::<u64>();
    let (pos, _) = run_chains(obs, chan, c, cfg, &[seed], Dynamics::Underdamped)?;
    Ok(candidates_from(&pos, obs, chan, c).remove(0))
}

/// Runs one chain per seed and keeps the best candidate.
pub fn detect_with_seeds(
    obs: &Observation,
    chan: &ChannelRealization,
    c: &Constellation,
    cfg: &LangevinConfig,
    seeds: &[u64],
    dynamics: Dynamics,
) -> Result<DetectionResult> {
    if seeds.is_empty() {
        return Err(crate::error::invalid("at least one trajectory is required"));
    }
    let (pos, evals) = run_chains(obs, chan, c, cfg, seeds, dynamics)?;
    Ok(DetectionResult::select(
        candidates_from(&pos, obs, chan, c),
        evals,
    ))
}

fn draw_seeds<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Vec<u64> {
    (0..m).map(|_| rng.gen()).collect()
}

/// Annealed underdamped Langevin detector over `num_trajectories` chains.
pub fn detect<R: Rng + ?Sized>(
    obs: &Observation,
    chan: &ChannelRealization,
    c: &Constellation,
    cfg: &LangevinConfig,
    rng: &mut R,
) -> Result<DetectionResult> {
    let seeds = draw_seeds(cfg.num_trajectories, rng);
    detect_with_seeds(obs, chan, c, cfg, &seeds, Dynamics::Underdamped)
}

/// Annealed overdamped Langevin detector; `friction` and `mass_scalar` are
/// unused.
pub fn overdamped_detect<R: Rng + ?Sized>(
    obs: &Observation,
    chan: &ChannelRealization,
    c: &Constellation,
    cfg: &LangevinConfig,
    rng: &mut R,
) -> Result<DetectionResult> {
    let seeds = draw_seeds(cfg.num_trajectories, rng);
    detect_with_seeds(obs, chan, c, cfg, &seeds, Dynamics::Overdamped)
}
