//! Small dense, diagonal, block-diagonal and sparse linear algebra.
//!
//! Every reduction runs in a fixed left-to-right order so that repeated runs
//! produce bitwise identical results.

mod dense;
mod diag;
mod eigen;
mod sparse;

pub use dense::DenseMatrix;
pub use diag::{BlockDiagMatrix, BlockSolve, DiagMatrix, DiagOrBlock};
pub use eigen::{
    dense_sym_spectrum, dense_sym_spectrum_capped, sym_lambda_extremes, tridiagonal_eigenvalues,
    SpectrumEstimate, DEFAULT_DENSE_CAP, DEFAULT_EIGEN_MAX_ITER, DEFAULT_EIGEN_TOL,
};
pub use sparse::{ColumnSplit, CsrMatrix, SparseSymMatrix, TripletBuilder};

use crate::error::{check_len, Result};

/// A square linear map that can be applied to a vector.
pub trait MatVec {
    fn dim(&self) -> usize;

    /// `y <- M x`; both slices must have length `dim()`.
    fn apply_into(&self, x: &[f64], y: &mut [f64]);

    fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim(), x.len())?;
        let mut y = vec![0.0; x.len()];
        self.apply_into(x, &mut y);
        Ok(y)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = 0.0;
    for (x, y) in a.iter().zip(b) {
        s += x * y;
    }
    s
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y <- y + alpha x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale(alpha: f64, x: &mut [f64]) {
    for v in x {
        *v *= alpha;
    }
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Maximum entrywise difference relative to the larger of the two magnitudes.
pub fn relative_diff(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let scale = max_abs(a).max(max_abs(b));
    if scale == 0.0 {
        return 0.0;
    }
    let mut d = 0.0_f64;
    for (x, y) in a.iter().zip(b) {
        d = d.max((x - y).abs());
    }
    d / scale
}
