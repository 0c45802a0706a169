//! Annealed posterior score in the spectral domain.
//!
//! With `H̄ = U Σ Vᵀ`, `χ = Vᵀ x̃` and `η = Uᵀ y`, the likelihood score is
//! diagonal:
//!
//! ```text
//! ∇χ log p(η | χ) = Σᵀ |σ0'² I − σ_l² Σ Σᵀ|† (η − Σ χ)
//! ```
//!
//! and the prior score comes from the Gaussian-smoothed constellation through
//! Tweedie's identity, `(E[x | x̃] − x̃)/σ_l²`, computed per real coordinate
//! over the PAM alphabet and rotated with `Vᵀ`. Here `σ0'² = σ0²/2` is the
//! per-real-coordinate noise variance. The two are combined per coordinate
//! according to [`ScoreBranch`].

use nalgebra::DMatrix;

use crate::channel::ChannelRealization;
use crate::constellation::Constellation;
use crate::error::{dim, invalid, Result};
use crate::linalg::{gemm_nn, gemm_tn};

/// Diagonal entries at or below this magnitude are treated as zero by the
/// pseudo-inverse.
pub const PINV_TOL: f64 = 1e-12;

/// Mixture weights whose log is below `-UNDERFLOW_CUT` relative to the largest
/// weight are dropped; `e^{-60}` is far below one ulp of the total.
const UNDERFLOW_CUT: f64 = 60.0;

/// Strictly decreasing positive noise levels `σ_1 > … > σ_L > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSchedule {
    levels: Vec<f64>,
}

impl NoiseSchedule {
    pub fn new(levels: Vec<f64>) -> Result<Self> {
        if levels.is_empty() {
            return Err(invalid("noise schedule needs at least one level"));
        }
        if levels.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(invalid("noise levels must be finite and positive"));
        }
        if levels.windows(2).any(|w| w[0] <= w[1]) {
            return Err(invalid("noise levels must be strictly decreasing"));
        }
        Ok(Self { levels })
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// `σ_L`, the smallest level.
    pub fn last(&self) -> f64 {
        *self.levels.last().expect("schedule is non-empty")
    }
}

/// A spectral-domain position `χ = Vᵀ x̃`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralPoint {
    chi: Vec<f64>,
}

impl SpectralPoint {
    pub fn new(chi: Vec<f64>) -> Result<Self> {
        if chi.iter().any(|v| !v.is_finite()) {
            return Err(invalid("spectral point has non-finite entries"));
        }
        Ok(Self { chi })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.chi
    }

    pub fn len(&self) -> usize {
        self.chi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chi.is_empty()
    }
}

/// Which terms enter coordinate `j` of the combined score.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreBranch {
    /// `σ0' ≥ σ_l s_j`: likelihood plus prior.
    LikelihoodAndPrior,
    /// `σ0' < σ_l s_j`: likelihood only.
    LikelihoodOnly,
    /// `s_j = 0`: prior only.
    PriorOnly,
}

impl ScoreBranch {
    pub fn select(s_j: f64, real_noise_std: f64, sigma_l: f64) -> Self {
        if s_j == 0.0 {
            ScoreBranch::PriorOnly
        } else if real_noise_std >= sigma_l * s_j {
            ScoreBranch::LikelihoodAndPrior
        } else {
            ScoreBranch::LikelihoodOnly
        }
    }

    pub fn has_prior(self) -> bool {
        !matches!(self, ScoreBranch::LikelihoodOnly)
    }
}

/// Per-level coefficients of the spectral score: coordinate `j` of the
/// likelihood score is `gain_j (η_j − s_j χ_j)`.
#[derive(Debug, Clone)]
pub(crate) struct LevelScore {
    pub sigma: f64,
    pub gain: Vec<f64>,
    pub branch: Vec<ScoreBranch>,
    pub any_prior: bool,
}

impl LevelScore {
    pub fn new(chan: &ChannelRealization, sigma_l: f64) -> Self {
        let nv = chan.real_noise_var();
        let std = chan.real_noise_std();
        let rows = chan.h_real().nrows();
        let s = chan.singular_values();
        let gain: Vec<f64> = s
            .iter()
            .enumerate()
            .map(|(j, &sj)| {
                let d = (nv - sigma_l * sigma_l * sj * sj).abs();
                if j >= rows || sj == 0.0 || d <= PINV_TOL {
                    0.0
                } else {
                    sj / d
                }
            })
            .collect();
        let branch: Vec<ScoreBranch> = s
            .iter()
            .map(|&sj| ScoreBranch::select(sj, std, sigma_l))
            .collect();
        let any_prior = branch.iter().any(|b| b.has_prior());
        Self {
            sigma: sigma_l,
            gain,
            branch,
            any_prior,
        }
    }
}

#[inline]
fn denoise_coord(x: f64, inv_two_var: f64, levels: &[f64]) -> f64 {
    let mut dmin = f64::INFINITY;
    for &l in levels {
        let d = (x - l) * (x - l);
        if d < dmin {
            dmin = d;
        }
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for &l in levels {
        let e = ((x - l) * (x - l) - dmin) * inv_two_var;
        if e < UNDERFLOW_CUT {
            let w = (-e).exp();
            num += l * w;
            den += w;
        }
    }
    num / den
}

fn check_sigma(sigma_l: f64) -> Result<()> {
    if !(sigma_l.is_finite() && sigma_l > 0.0) {
        return Err(invalid(format!(
            "noise level must be positive, got {sigma_l}"
        )));
    }
    Ok(())
}

/// MMSE estimate `E[x | x̃]` of a uniform PAM symbol observed in Gaussian noise
/// of standard deviation `σ_l`, coordinatewise.
pub fn denoise(x_tilde: &[f64], sigma_l: f64, c: &Constellation) -> Result<Vec<f64>> {
    check_sigma(sigma_l)?;
    let inv = 0.5 / (sigma_l * sigma_l);
    Ok(x_tilde
        .iter()
        .map(|&x| denoise_coord(x, inv, c.pam_levels()))
        .collect())
}

/// Score of the smoothed prior, `(denoise(x̃) − x̃)/σ_l²`.
pub fn prior_score(x_tilde: &[f64], sigma_l: f64, c: &Constellation) -> Result<Vec<f64>> {
    let den = denoise(x_tilde, sigma_l, c)?;
    let var = sigma_l * sigma_l;
    Ok(den
        .iter()
        .zip(x_tilde)
        .map(|(d, x)| (d - x) / var)
        .collect())
}

fn check_spectral_dims(chi: &[f64], eta: &[f64], chan: &ChannelRealization) -> Result<()> {
    let (rows, cols) = chan.h_real().shape();
    if chi.len() != cols {
        return Err(dim(format!("χ has length {}, expected {cols}", chi.len())));
    }
    if eta.len() != rows {
        return Err(dim(format!("η has length {}, expected {rows}", eta.len())));
    }
    Ok(())
}

/// Spectral likelihood score `Σᵀ |σ0'² I − σ_l² ΣΣᵀ|† (η − Σχ)`.
pub fn likelihood_score(
    chi: &SpectralPoint,
    eta: &[f64],
    chan: &ChannelRealization,
    sigma_l: f64,
) -> Result<Vec<f64>> {
    if !(sigma_l.is_finite() && sigma_l >= 0.0) {
        return Err(invalid(format!("noise level must be >= 0, got {sigma_l}")));
    }
    let chi = chi.as_slice();
    check_spectral_dims(chi, eta, chan)?;
    let level = LevelScore::new(chan, sigma_l);
    let s = chan.singular_values();
    Ok((0..chi.len())
        .map(|j| likelihood_coord(&level, s, eta, chi[j], j))
        .collect())
}

#[inline]
fn likelihood_coord(level: &LevelScore, s: &[f64], eta: &[f64], chi_j: f64, j: usize) -> f64 {
    let g = level.gain[j];
    if g == 0.0 {
        0.0
    } else {
        g * (eta[j] - s[j] * chi_j)
    }
}

/// Elementwise case-split combination of the likelihood score and the rotated
/// prior score.
pub fn combined_score(
    chi: &SpectralPoint,
    eta: &[f64],
    chan: &ChannelRealization,
    sigma_l: f64,
    c: &Constellation,
) -> Result<Vec<f64>> {
    check_sigma(sigma_l)?;
    check_spectral_dims(chi.as_slice(), eta, chan)?;
    let n = chi.len();
    let level = LevelScore::new(chan, sigma_l);
    let mut ws = ScoreWorkspace::new(n, 1);
    ws.position.copy_from_slice(chi.as_slice());
    ws.evaluate(chan, eta, &level, c);
    Ok(ws.score.as_slice().to_vec())
}

/// Scratch buffers for evaluating the combined score on a batch of positions
/// stored as the columns of `position`.
#[derive(Debug, Clone)]
pub(crate) struct ScoreWorkspace {
    pub position: DMatrix<f64>,
    pub score: DMatrix<f64>,
    x_tilde: DMatrix<f64>,
    prior_spectral: DMatrix<f64>,
}

impl ScoreWorkspace {
    pub fn new(dim: usize, batch: usize) -> Self {
        Self {
            position: DMatrix::zeros(dim, batch),
            score: DMatrix::zeros(dim, batch),
            x_tilde: DMatrix::zeros(dim, batch),
            prior_spectral: DMatrix::zeros(dim, batch),
        }
    }

    /// Fills `score` with the combined score at every column of `position`.
    pub fn evaluate(
        &mut self,
        chan: &ChannelRealization,
        eta: &[f64],
        level: &LevelScore,
        c: &Constellation,
    ) {
        let v = chan.svd_v();
        let s = chan.singular_values();
        let n = self.position.nrows();
        if level.any_prior {
            gemm_nn(v, &self.position, &mut self.x_tilde);
            let var = level.sigma * level.sigma;
            let inv = 0.5 / var;
            let levels = c.pam_levels();
            for x in self.x_tilde.iter_mut() {
                *x = (denoise_coord(*x, inv, levels) - *x) / var;
            }
            gemm_tn(v, &self.x_tilde, &mut self.prior_spectral);
        }
        for t in 0..self.position.ncols() {
            let pos = self.position.column(t);
            let prior = self.prior_spectral.column(t);
            let mut out = self.score.column_mut(t);
            for j in 0..n {
                out[j] = match level.branch[j] {
                    ScoreBranch::PriorOnly => prior[j],
                    ScoreBranch::LikelihoodAndPrior => {
                        likelihood_coord(level, s, eta, pos[j], j) + prior[j]
                    }
                    ScoreBranch::LikelihoodOnly => likelihood_coord(level, s, eta, pos[j], j),
                };
            }
        }
    }
}
