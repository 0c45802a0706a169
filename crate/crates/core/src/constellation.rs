//! Square QAM constellations.
//!
//! A square K-QAM factors into two copies of a √K-level PAM alphabet, one per
//! real coordinate. Every detector in this crate works on the real lift
//! `[Re x; Im x]`, so the PAM levels are what gets rounded against and denoised
//! over; the complex points exist for symbol generation and SER bookkeeping.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{dim, invalid, Result};

/// Distance below which two symbols are considered equal when scoring.
const SYMBOL_EQ_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    order: usize,
    complex_points: Vec<Complex64>,
    pam_levels: Vec<f64>,
    normalization: f64,
}

impl Constellation {
    /// Builds a unit-average-power square QAM of order `k`.
    pub fn qam(k: usize) -> Result<Self> {
        let side = (k as f64).sqrt().round() as usize;
        if k < 4 || side * side != k {
            return Err(invalid(format!(
                "QAM order must be a perfect square >= 4, got {k}"
            )));
        }
        // Unnormalized levels are the odd integers ±1, ±3, ... whose mean
        // square per real axis is (K - 1)/3, so the complex power is 2(K - 1)/3.
        let normalization = (2.0 * (k as f64 - 1.0) / 3.0).sqrt();
        let pam_levels: Vec<f64> = (0..side)
            .map(|i| (2.0 * i as f64 - (side as f64 - 1.0)) / normalization)
            .collect();
        let complex_points = pam_levels
            .iter()
            .flat_map(|&re| pam_levels.iter().map(move |&im| Complex64::new(re, im)))
            .collect();
        Ok(Self {
            order: k,
            complex_points,
            pam_levels,
            normalization,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn complex_points(&self) -> &[Complex64] {
        &self.complex_points
    }

    /// Per-real-dimension alphabet, sorted ascending.
    pub fn pam_levels(&self) -> &[f64] {
        &self.pam_levels
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// Nearest PAM level to `value`. Ties go to the level of smaller magnitude,
    /// and between equal magnitudes to the lower level.
    pub fn nearest(&self, value: f64) -> f64 {
        let mut best = self.pam_levels[0];
        let mut best_dist = (value - best).abs();
        for &level in &self.pam_levels[1..] {
            let d = (value - level).abs();
            if d < best_dist || (d == best_dist && level.abs() < best.abs()) {
                best = level;
                best_dist = d;
            }
        }
        best
    }

    /// Rounds a real-lifted vector `[Re; Im]` coordinatewise and folds it back
    /// into complex symbols.
    pub fn round_real_lift(&self, x_real: &[f64]) -> Vec<Complex64> {
        let n = x_real.len() / 2;
        (0..n)
            .map(|i| Complex64::new(self.nearest(x_real[i]), self.nearest(x_real[i + n])))
            .collect()
    }

    /// Draws `n` symbols uniformly from the constellation.
    pub fn random_symbols<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<Complex64> {
        (0..n)
            .map(|_| self.complex_points[rng.gen_range(0..self.order)])
            .collect()
    }
}

/// Stacks a complex vector as `[Re x; Im x]`.
pub fn to_real_lift(x: &[Complex64]) -> Vec<f64> {
    x.iter()
        .map(|c| c.re)
        .chain(x.iter().map(|c| c.im))
        .collect()
}

/// Number of complex symbols that differ between two vectors.
pub fn symbol_errors(estimate: &[Complex64], truth: &[Complex64]) -> Result<usize> {
    if estimate.len() != truth.len() {
        return Err(dim(format!(
            "symbol vectors have lengths {} and {}",
            estimate.len(),
            truth.len()
        )));
    }
    Ok(estimate
        .iter()
        .zip(truth)
        .filter(|(a, b)| (**a - **b).norm() > SYMBOL_EQ_TOL)
        .count())
}

/// Symbol error rate over a batch of symbol vectors.
pub fn ser<S: AsRef<[Complex64]>>(estimate: &[S], truth: &[S]) -> Result<f64> {
    if estimate.len() != truth.len() {
        return Err(dim(format!(
            "batches hold {} and {} vectors",
            estimate.len(),
            truth.len()
        )));
    }
    let mut errors = 0usize;
    let mut total = 0usize;
    for (e, t) in estimate.iter().zip(truth) {
        errors += symbol_errors(e.as_ref(), t.as_ref())?;
        total += t.as_ref().len();
    }
    if total == 0 {
        return Ok(0.0);
    }
    Ok(errors as f64 / total as f64)
}
