//! Linear detectors: zero-forcing and MMSE, both evaluated through the cached
//! SVD of the real-equivalent channel and rounded coordinatewise.

use nalgebra::DVector;

use crate::channel::{ChannelRealization, Observation};
use crate::constellation::{to_real_lift, Constellation};
use crate::error::{dim, Result};
use crate::langevin::{Candidate, DetectionResult};

/// Singular values below this fraction of the largest are dropped by the
/// zero-forcing pseudo-inverse.
pub const ZF_RANK_TOL: f64 = 1e-10;

/// Average energy of one real coordinate of a unit-power complex symbol.
const REAL_SYMBOL_ENERGY: f64 = 0.5;

fn check(obs: &Observation, chan: &ChannelRealization) -> Result<()> {
    if obs.eta.len() != chan.h_real().nrows() {
        return Err(dim(format!(
            "observation has length {}, channel expects {}",
            obs.eta.len(),
            chan.h_real().nrows()
        )));
    }
    Ok(())
}

/// `V diag(f(s_j)) η` restricted to the leading `min(rows, cols)` coordinates.
fn spectral_filter(
    obs: &Observation,
    chan: &ChannelRealization,
    f: impl Fn(f64) -> f64,
) -> Vec<f64> {
    let (rows, cols) = chan.h_real().shape();
    let s = chan.singular_values();
    let mut z = DVector::zeros(cols);
    for j in 0..rows.min(cols) {
        z[j] = f(s[j]) * obs.eta[j];
    }
    (chan.svd_v() * z).as_slice().to_vec()
}

/// Pre-rounding zero-forcing estimate `H̄† y`.
pub fn zf_estimate(obs: &Observation, chan: &ChannelRealization) -> Result<Vec<f64>> {
    check(obs, chan)?;
    let cut = ZF_RANK_TOL * chan.singular_values().first().copied().unwrap_or(0.0);
    Ok(spectral_filter(obs, chan, |s| {
        if s > cut {
            1.0 / s
        } else {
            0.0
        }
    }))
}

/// Pre-rounding regularized estimate `(H̄ᵀH̄ + λ I)⁻¹ H̄ᵀ y`.
pub fn mmse_estimate(
    obs: &Observation,
    chan: &ChannelRealization,
    regularizer: f64,
) -> Result<Vec<f64>> {
    check(obs, chan)?;
    Ok(spectral_filter(obs, chan, |s| {
        let d = s * s + regularizer;
        if d > 0.0 {
            s / d
        } else {
            0.0
        }
    }))
}

/// LMMSE regularizer on the real lift.
///
/// Each real coordinate carries noise variance `σ0²/2` and signal energy
/// `1/2` (unit-power complex symbols), so `(H̄ᵀH̄ + (σ0²/2)/(1/2) I)⁻¹ H̄ᵀ`,
/// i.e. `λ = σ0²`.
pub fn mmse_regularizer(chan: &ChannelRealization) -> f64 {
    chan.real_noise_var() / REAL_SYMBOL_ENERGY
}

fn finish(
    estimate: &[f64],
    obs: &Observation,
    chan: &ChannelRealization,
    c: &Constellation,
) -> DetectionResult {
    let symbols = c.round_real_lift(estimate);
    let residual = chan.residual(&obs.y_real, &to_real_lift(&symbols));
    DetectionResult::select(vec![Candidate { symbols, residual }], 0)
}

pub fn zf_detect(
    obs: &Observation,
    chan: &ChannelRealization,
    c: &Constellation,
) -> Result<DetectionResult> {
    let est = zf_estimate(obs, chan)?;
    Ok(finish(&est, obs, chan, c))
}

pub fn mmse_detect(
    obs: &Observation,
    chan: &ChannelRealization,
    c: &Constellation,
) -> Result<DetectionResult> {
    let est = mmse_estimate(obs, chan, mmse_regularizer(chan))?;
    Ok(finish(&est, obs, chan, c))
}
