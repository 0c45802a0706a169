//! Dense kernels used on the sampler hot path.
//!
//! Both helpers go straight to `matrixmultiply` so that a column of the output
//! is computed the same way no matter how many columns are in the batch.

use nalgebra::DMatrix;

/// `c = a · b`.
pub(crate) fn gemm_nn(a: &DMatrix<f64>, b: &DMatrix<f64>, c: &mut DMatrix<f64>) {
    let (m, k) = a.shape();
    let n = b.ncols();
    assert_eq!(b.nrows(), k);
    assert_eq!(c.shape(), (m, n));
    // SAFETY: shapes checked above; all three buffers are column-major and
    // `c` does not alias `a` or `b` (guaranteed by the borrow).
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            1,
            m as isize,
            b.as_ptr(),
            1,
            k as isize,
            0.0,
            c.as_mut_ptr(),
            1,
            m as isize,
        );
    }
}

/// `c = aᵀ · b`.
pub(crate) fn gemm_tn(a: &DMatrix<f64>, b: &DMatrix<f64>, c: &mut DMatrix<f64>) {
    let (k, m) = a.shape();
    let n = b.ncols();
    assert_eq!(b.nrows(), k);
    assert_eq!(c.shape(), (m, n));
    // SAFETY: as in `gemm_nn`; `aᵀ` is read through swapped strides.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            k as isize,
            1,
            b.as_ptr(),
            1,
            k as isize,
            0.0,
            c.as_mut_ptr(),
            1,
            m as isize,
        );
    }
}
