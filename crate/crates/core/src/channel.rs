//! Channel generation and the real-equivalent system.
//!
//! Channels follow the Kronecker model `H = R_r^{1/2} H_e R_u^{1/2}` with an
//! i.i.d. Rayleigh `H_e` whose entries have variance `1/Nr`, so that
//! `E‖Hx‖² = Nu` for unit-power symbols. Everything downstream runs on the
//! real lift `H̄ = [[Re H, -Im H], [Im H, Re H]]`; a [`ChannelRealization`]
//! caches `H̄` together with a full SVD `H̄ = U Σ Vᵀ`.

use nalgebra::{DMatrix, DVector, SymmetricEigen, QR, SVD};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::constellation::to_real_lift;
use crate::error::{dim, invalid, Error, Result};

/// Eigenvalues of a correlation matrix below this are treated as a non-PSD input.
const PSD_TOL: f64 = -1e-10;

/// A dense complex matrix with positive dimensions and finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Err(dim("complex matrix must have positive dimensions"));
        }
        if m.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(invalid("complex matrix has non-finite entries"));
        }
        Ok(Self(m))
    }

    /// Builds from row-major real and imaginary parts.
    pub fn from_parts(rows: usize, cols: usize, re: &[f64], im: &[f64]) -> Result<Self> {
        if re.len() != rows * cols || im.len() != rows * cols {
            return Err(dim(format!(
                "expected {} entries for a {rows}x{cols} matrix",
                rows * cols
            )));
        }
        Self::new(DMatrix::from_fn(rows, cols, |i, j| {
            Complex64::new(re[i * cols + j], im[i * cols + j])
        }))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<Complex64> {
        self.0
    }
}

/// I.i.d. circular complex Gaussian matrix with entry variance `1/nr`.
pub fn generate_rayleigh<R: Rng + ?Sized>(nr: usize, nu: usize, rng: &mut R) -> ComplexMatrix {
    let std = (0.5 / nr as f64).sqrt();
    let m = DMatrix::from_fn(nr, nu, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(std * re, std * im)
    });
    ComplexMatrix(m)
}

/// Exponential correlation matrix `R_ij = rho^|i-j|`.
pub fn exp_corr_matrix(n: usize, rho: f64) -> Result<DMatrix<f64>> {
    if !(0.0..1.0).contains(&rho) {
        return Err(invalid(format!(
            "correlation coefficient must lie in [0, 1), got {rho}"
        )));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| {
        rho.powi(i.abs_diff(j) as i32)
    }))
}

/// Symmetric PSD square root through an eigendecomposition, clamping
/// roundoff-sized negative eigenvalues at zero.
pub fn psd_sqrt(r: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !r.is_square() {
        return Err(dim(format!(
            "correlation matrix is {}x{}",
            r.nrows(),
            r.ncols()
        )));
    }
    let eig = SymmetricEigen::new(r.clone());
    if let Some(min) = eig.eigenvalues.iter().copied().reduce(f64::min) {
        if min < PSD_TOL {
            return Err(invalid(format!(
                "correlation matrix is not PSD (eigenvalue {min:e})"
            )));
        }
    }
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    let q = &eig.eigenvectors;
    Ok(q * DMatrix::from_diagonal(&roots) * q.transpose())
}

/// `R_r^{1/2} H_e R_u^{1/2}`.
pub fn kronecker_channel(
    he: &ComplexMatrix,
    r_rx: &DMatrix<f64>,
    r_tx: &DMatrix<f64>,
) -> Result<ComplexMatrix> {
    let (nr, nu) = (he.rows(), he.cols());
    if r_rx.shape() != (nr, nr) || r_tx.shape() != (nu, nu) {
        return Err(dim(format!(
            "H_e is {nr}x{nu} but correlations are {:?} and {:?}",
            r_rx.shape(),
            r_tx.shape()
        )));
    }
    let to_c = |m: DMatrix<f64>| m.map(|v| Complex64::new(v, 0.0));
    let rx = to_c(psd_sqrt(r_rx)?);
    let tx = to_c(psd_sqrt(r_tx)?);
    ComplexMatrix::new(rx * he.as_matrix() * tx)
}

/// Draws a Kronecker-correlated channel with exponential correlation `rho` on
/// both ends.
pub fn generate_kronecker<R: Rng + ?Sized>(
    nr: usize,
    nu: usize,
    rho: f64,
    rng: &mut R,
) -> Result<ComplexMatrix> {
    let he = generate_rayleigh(nr, nu, rng);
    if rho == 0.0 {
        return Ok(he);
    }
    kronecker_channel(&he, &exp_corr_matrix(nr, rho)?, &exp_corr_matrix(nu, rho)?)
}

/// `[[Re H, -Im H], [Im H, Re H]]`.
pub fn to_real_equivalent(h: &ComplexMatrix) -> DMatrix<f64> {
    let (r, c) = (h.rows(), h.cols());
    let m = h.as_matrix();
    DMatrix::from_fn(2 * r, 2 * c, |i, j| {
        let z = m[(i % r, j % c)];
        match (i < r, j < c) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Extends an `n x k` matrix with orthonormal columns to an `n x n`
/// orthogonal matrix whose leading `k` columns are the input.
fn complete_orthonormal(thin: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, k) = thin.shape();
    if k == n {
        return thin.clone();
    }
    let qr = QR::new(thin.clone());
    let mut qt = DMatrix::<f64>::identity(n, n);
    qr.q_tr_mul(&mut qt);
    let mut q = qt.transpose();
    q.columns_mut(0, k).copy_from(thin);
    q
}

/// One channel use: the complex channel, its real lift, a full SVD of the lift
/// and the receiver noise variance `σ0²` (per complex dimension).
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    h_complex: ComplexMatrix,
    h_real: DMatrix<f64>,
    svd_u: DMatrix<f64>,
    singular_values: Vec<f64>,
    svd_v: DMatrix<f64>,
    noise_var: f64,
}

impl ChannelRealization {
    pub fn new(h: ComplexMatrix, noise_var: f64) -> Result<Self> {
        if !(noise_var.is_finite() && noise_var >= 0.0) {
            return Err(invalid(format!(
                "noise variance must be finite and >= 0, got {noise_var}"
            )));
        }
        let h_real = to_real_equivalent(&h);
        let cols = h_real.ncols();
        let svd = SVD::try_new(h_real.clone(), true, true, f64::EPSILON, 0)
            .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
        let u_thin = svd.u.expect("U requested");
        let v_thin = svd.v_t.expect("Vᵀ requested").transpose();
        let mut singular_values: Vec<f64> = svd.singular_values.iter().copied().collect();
        singular_values.resize(cols, 0.0);
        Ok(Self {
            svd_u: complete_orthonormal(&u_thin),
            svd_v: complete_orthonormal(&v_thin),
            singular_values,
            h_complex: h,
            h_real,
            noise_var,
        })
    }

    /// Same channel and SVD with a different noise variance.
    pub fn with_noise_var(&self, noise_var: f64) -> Result<Self> {
        if !(noise_var.is_finite() && noise_var >= 0.0) {
            return Err(invalid(format!(
                "noise variance must be finite and >= 0, got {noise_var}"
            )));
        }
        Ok(Self {
            noise_var,
            ..self.clone()
        })
    }

    pub fn nr(&self) -> usize {
        self.h_complex.rows()
    }

    pub fn nu(&self) -> usize {
        self.h_complex.cols()
    }

    pub fn h_complex(&self) -> &ComplexMatrix {
        &self.h_complex
    }

    pub fn h_real(&self) -> &DMatrix<f64> {
        &self.h_real
    }

    pub fn svd_u(&self) -> &DMatrix<f64> {
        &self.svd_u
    }

    /// Singular values of the real lift, non-increasing, zero-padded to `2Nu`.
    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    pub fn svd_v(&self) -> &DMatrix<f64> {
        &self.svd_v
    }

    /// `σ0²`, per complex dimension.
    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    /// `σ0²/2`, the noise variance seen by each real coordinate.
    pub fn real_noise_var(&self) -> f64 {
        0.5 * self.noise_var
    }

    pub fn real_noise_std(&self) -> f64 {
        self.real_noise_var().sqrt()
    }

    /// `‖y_real − H̄ x_real‖²`.
    pub fn residual(&self, y_real: &DVector<f64>, x_real: &[f64]) -> f64 {
        let x = DVector::from_column_slice(x_real);
        (y_real - &self.h_real * x).norm_squared()
    }
}

/// A received vector with its real lift and spectral image `η = Uᵀ y_real`.
#[derive(Debug, Clone)]
pub struct Observation {
    pub y: Vec<Complex64>,
    pub y_real: DVector<f64>,
    pub eta: DVector<f64>,
}

impl Observation {
    /// Wraps an externally received vector.
    pub fn from_received(chan: &ChannelRealization, y: Vec<Complex64>) -> Result<Self> {
        if y.len() != chan.nr() {
            return Err(dim(format!(
                "y has length {}, expected {}",
                y.len(),
                chan.nr()
            )));
        }
        let y_real = DVector::from_vec(to_real_lift(&y));
        let eta = chan.svd_u().tr_mul(&y_real);
        Ok(Self { y, y_real, eta })
    }
}

/// `y = Hx + z` with `z ~ CN(0, σ0² I)`.
pub fn observe<R: Rng + ?Sized>(
    chan: &ChannelRealization,
    x: &[Complex64],
    rng: &mut R,
) -> Result<Observation> {
    if x.len() != chan.nu() {
        return Err(dim(format!(
            "x has length {}, expected {}",
            x.len(),
            chan.nu()
        )));
    }
    let h = chan.h_complex().as_matrix();
    let xv = DVector::from_column_slice(x);
    let clean = h * xv;
    let std = chan.real_noise_std();
    let y = clean
        .iter()
        .map(|c| {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            c + Complex64::new(std * a, std * b)
        })
        .collect();
    Observation::from_received(chan, y)
}
