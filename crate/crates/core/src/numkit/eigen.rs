use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{axpy, dot, norm2, MatVec, SparseSymMatrix};
use crate::error::{Error, Result};

pub const DEFAULT_EIGEN_TOL: f64 = 1e-10;
pub const DEFAULT_EIGEN_MAX_ITER: usize = 5000;
pub const DEFAULT_DENSE_CAP: usize = 4096;

const START_SEED: u64 = 0x5eed_1a2c;

/// Extreme eigenvalues of a symmetric operator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumEstimate {
    pub lambda_max: f64,
    pub lambda_min: f64,
    /// Larger of the two relative Ritz residuals.
    pub residual: f64,
    /// Total Lanczos steps over both runs.
    pub iterations: usize,
}

struct Shifted<'a, M: ?Sized> {
    m: &'a M,
    shift: f64,
}

impl<M: MatVec + ?Sized> MatVec for Shifted<'_, M> {
    fn dim(&self) -> usize {
        self.m.dim()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        self.m.apply_into(x, y);
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi = self.shift * xi - *yi;
        }
    }
}

struct RitzMax {
    value: f64,
    /// Absolute residual `|beta_k s_k|` of the top Ritz pair.
    residual: f64,
    iterations: usize,
    converged: bool,
}

/// Largest eigenvalue by Lanczos with full reorthogonalization.
fn lanczos_max<M: MatVec + ?Sized>(m: &M, tol: f64, max_iter: usize) -> RitzMax {
    let n = m.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let nv = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nv);

    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let mut best = RitzMax {
        value: 0.0,
        residual: f64::INFINITY,
        iterations: 0,
        converged: false,
    };
    let limit = max_iter.min(n).max(1);
    // the tridiagonal solve is O(k^2), so convergence is tested at a
    // geometrically growing stride once k is large
    let mut next_check = 0;
    for k in 0..limit {
        m.apply_into(&v, &mut w);
        let a = dot(&w, &v);
        axpy(-a, &v, &mut w);
        if let Some(prev) = basis.last() {
            axpy(-beta[k - 1], prev, &mut w);
        }
        basis.push(v.clone());
        // two passes of classical Gram-Schmidt keep the basis orthonormal
        for _ in 0..2 {
            for q in &basis {
                let c = dot(&w, q);
                axpy(-c, q, &mut w);
            }
        }
        alpha.push(a);
        let b = norm2(&w);
        let last_step = k + 1 == limit;
        if k < next_check && !last_step && b > 0.0 {
            beta.push(b);
            v.iter_mut().zip(&w).for_each(|(vi, wi)| *vi = wi / b);
            continue;
        }
        next_check = k + 1 + k / 16;

        let (vals, last) = tridiagonal_eigen_last_row(&alpha, &beta);
        let top = vals.len() - 1;
        let value = vals[top];
        let residual = (b * last[top]).abs();
        let scale = vals[0].abs().max(value.abs());
        best = RitzMax {
            value,
            residual,
            iterations: k + 1,
            converged: false,
        };
        let invariant = b <= 1e-14 * scale.max(f64::MIN_POSITIVE) || b == 0.0;
        if invariant || residual <= tol * scale || scale == 0.0 {
            best.converged = true;
            best.residual = if invariant { 0.0 } else { residual };
            return best;
        }
        beta.push(b);
        v.iter_mut().zip(&w).for_each(|(vi, wi)| *vi = wi / b);
    }
    // a full Krylov space of dimension n is exact up to rounding
    if limit == n {
        best.converged = true;
    }
    best
}

/// `lambda_max` by Lanczos and `lambda_min` by Lanczos on `lambda_max I - m`.
///
/// The start vector is drawn from a fixed seed so results are reproducible.
pub fn sym_lambda_extremes<M: MatVec + ?Sized>(
    m: &M,
    tol: f64,
    max_iter: usize,
) -> Result<SpectrumEstimate> {
    if !(tol > 0.0) {
        return Err(Error::input("eigen tolerance must be positive"));
    }
    if m.dim() == 0 {
        return Err(Error::input("empty matrix"));
    }
    let hi = lanczos_max(m, tol, max_iter);
    let shifted = Shifted { m, shift: hi.value };
    let lo = lanczos_max(&shifted, tol, max_iter);
    let lambda_max = hi.value;
    let lambda_min = (lambda_max - lo.value).min(lambda_max);
    let scale = lambda_max.abs().max(lambda_min.abs());
    let rel = |r: f64| if scale > 0.0 { r / scale } else { 0.0 };
    let est = SpectrumEstimate {
        lambda_max,
        lambda_min,
        residual: rel(hi.residual).max(rel(lo.residual)),
        iterations: hi.iterations + lo.iterations,
    };
    if hi.converged && lo.converged {
        Ok(est)
    } else {
        Err(Error::Convergence {
            lambda_max: est.lambda_max,
            lambda_min: est.lambda_min,
            residual: est.residual,
            iterations: est.iterations,
        })
    }
}

/// Full spectrum in ascending order, capped at [`DEFAULT_DENSE_CAP`].
pub fn dense_sym_spectrum(m: &SparseSymMatrix) -> Result<Vec<f64>> {
    dense_sym_spectrum_capped(m, DEFAULT_DENSE_CAP)
}

/// Full spectrum by cyclic Jacobi rotations for `n <= cap`.
pub fn dense_sym_spectrum_capped(m: &SparseSymMatrix, cap: usize) -> Result<Vec<f64>> {
    let n = m.n();
    if n > cap {
        return Err(Error::SizeCap { n, cap });
    }
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        let (c, v) = m.csr().row(i);
        for (&j, &x) in c.iter().zip(v) {
            a[i * n + j] = x;
        }
    }
    Ok(jacobi_eigenvalues(n, a))
}

fn jacobi_eigenvalues(n: usize, mut a: Vec<f64>) -> Vec<f64> {
    let frob = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    if frob > 0.0 {
        for _ in 0..100 {
            let mut off = 0.0;
            for i in 0..n {
                for j in i + 1..n {
                    off += a[i * n + j] * a[i * n + j];
                }
            }
            if off.sqrt() <= 1e-15 * frob {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a[p * n + q];
                    if apq == 0.0 {
                        continue;
                    }
                    let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                    let t = if theta == 0.0 {
                        1.0
                    } else {
                        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                    };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k * n + p];
                        let akq = a[k * n + q];
                        a[k * n + p] = c * akp - s * akq;
                        a[k * n + q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p * n + k];
                        let aqk = a[q * n + k];
                        a[p * n + k] = c * apk - s * aqk;
                        a[q * n + k] = s * apk + c * aqk;
                    }
                }
            }
        }
    }
    let mut vals: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    vals.sort_by(f64::total_cmp);
    vals
}

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `diag`
/// and off-diagonal `off`, ascending.
pub fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Vec<f64> {
    tridiagonal_eigen_last_row(diag, off).0
}

/// Implicit QL on a symmetric tridiagonal matrix.
///
/// Returns the eigenvalues in ascending order together with the last
/// component of each normalized eigenvector.
fn tridiagonal_eigen_last_row(diag: &[f64], off: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = diag.len();
    assert!(off.len() + 1 >= n, "off-diagonal too short");
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n.saturating_sub(1)].copy_from_slice(&off[..n.saturating_sub(1)]);
    let mut z = vec![0.0; n];
    if n > 0 {
        z[n - 1] = 1.0;
    }
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 200 {
                break;
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let zf = z[i + 1];
                z[i + 1] = s * z[i] + c * zf;
                z[i] = c * z[i] - s * zf;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    (
        order.iter().map(|&i| d[i]).collect(),
        order.iter().map(|&i| z[i]).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::DiagMatrix;
    use std::f64::consts::PI;

    #[test]
    fn diagonal_extremes() {
        let d = DiagMatrix::new(vec![1.0, 4.0]);
        let s = sym_lambda_extremes(&d, 1e-10, 100).unwrap();
        assert!((s.lambda_max - 4.0).abs() < 1e-12);
        assert!((s.lambda_min - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_matrix() {
        let z = DiagMatrix::new(vec![0.0; 3]);
        let s = sym_lambda_extremes(&z, 1e-10, 100).unwrap();
        assert_eq!((s.lambda_max, s.lambda_min), (0.0, 0.0));
    }

    #[test]
    fn laplacian_closed_form() {
        let t = SparseSymMatrix::tridiagonal(4, 2.0, -1.0);
        let s = sym_lambda_extremes(&t, 1e-10, 100).unwrap();
        assert!((s.lambda_max - (2.0 - 2.0 * (4.0 * PI / 5.0).cos())).abs() < 1e-10);
        assert!((s.lambda_min - (2.0 - 2.0 * (PI / 5.0).cos())).abs() < 1e-10);
    }

    #[test]
    fn large_laplacian_converges() {
        let n = 600;
        let t = SparseSymMatrix::tridiagonal(n, 2.0, -1.0);
        let s = sym_lambda_extremes(&t, 1e-10, 5000).unwrap();
        let exact = 2.0 - 2.0 * (n as f64 * PI / (n as f64 + 1.0)).cos();
        assert!((s.lambda_max - exact).abs() < 1e-8 * exact, "{s:?}");
    }

    #[test]
    fn dense_examples() {
        let d = SparseSymMatrix::from_diagonal(&[3.0, 1.0, 2.0]);
        assert_eq!(dense_sym_spectrum(&d).unwrap(), vec![1.0, 2.0, 3.0]);
        let t = SparseSymMatrix::tridiagonal(3, 2.0, -1.0);
        let v = dense_sym_spectrum(&t).unwrap();
        let r2 = 2f64.sqrt();
        for (a, b) in v.iter().zip([2.0 - r2, 2.0, 2.0 + r2]) {
            assert!((a - b).abs() < 1e-13);
        }
        let swap = SparseSymMatrix::tridiagonal(2, 0.0, 1.0);
        let v = dense_sym_spectrum(&swap).unwrap();
        assert!((v[0] + 1.0).abs() < 1e-15 && (v[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dense_cap() {
        let t = SparseSymMatrix::tridiagonal(5, 2.0, -1.0);
        assert!(matches!(
            dense_sym_spectrum_capped(&t, 4),
            Err(Error::SizeCap { n: 5, cap: 4 })
        ));
    }

    #[test]
    fn iteration_budget_exhausted() {
        let t = SparseSymMatrix::tridiagonal(500, 2.0, -1.0);
        assert!(matches!(
            sym_lambda_extremes(&t, 1e-14, 3),
            Err(Error::Convergence { iterations: 6, .. })
        ));
    }

    #[test]
    fn tridiagonal_ql() {
        let v = tridiagonal_eigenvalues(&[2.0; 6], &[-1.0; 5]);
        for (j, x) in v.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((j + 1) as f64 * PI / 7.0).cos();
            assert!((x - exact).abs() < 1e-13);
        }
    }
}
