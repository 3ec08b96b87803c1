use super::{DenseMatrix, MatVec};
use crate::error::{Error, Result};

/// Relative tolerance on `|a_ij - a_ji|` accepted by [`SparseSymMatrix`].
const SYMMETRY_TOL: f64 = 1e-13;

/// Accumulates `(row, col, value)` entries; duplicates are summed.
#[derive(Clone, Debug, Default)]
pub struct TripletBuilder {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        assert!(
            i < self.rows && j < self.cols,
            "triplet ({i},{j}) out of range"
        );
        self.entries.push((i, j, v));
    }

    pub fn build(mut self) -> CsrMatrix {
        // stable sort keeps the summation order of duplicates deterministic
        self.entries.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; self.rows + 1];
        let mut cols = Vec::with_capacity(self.entries.len());
        let mut vals: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in self.entries {
            if last == Some((i, j)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(j);
                vals.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..self.rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix {
            rows: self.rows,
            cols: self.cols,
            row_ptr,
            col_idx: cols,
            values: vals,
        }
    }
}

/// General compressed-sparse-row matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        let n = d.len();
        Self {
            rows: n,
            cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: d.to_vec(),
        }
    }

    pub fn from_dense(m: &DenseMatrix) -> Self {
        let mut b = TripletBuilder::new(m.rows(), m.cols());
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                if m[(i, j)] != 0.0 {
                    b.push(i, j, m[(i, j)]);
                }
            }
        }
        b.build()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (c, v) = self.row(i);
        match c.binary_search(&j) {
            Ok(k) => v[k],
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            let (c, v) = self.row(i);
            for (&j, &x) in c.iter().zip(v) {
                d[(i, j)] += x;
            }
        }
        d
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `y <- self x` for rectangular shapes.
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(y.len(), self.rows);
        for (i, yi) in y.iter_mut().enumerate() {
            let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let mut s = 0.0;
            for (v, &j) in self.values[a..b].iter().zip(&self.col_idx[a..b]) {
                s += v * x[j];
            }
            *yi = s;
        }
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut b = TripletBuilder::new(self.cols, self.rows);
        for i in 0..self.rows {
            let (c, v) = self.row(i);
            for (&j, &x) in c.iter().zip(v) {
                b.push(j, i, x);
            }
        }
        b.build()
    }

    /// Sparse product `self * other` (Gustavson, row by row).
    pub fn mul(&self, other: &CsrMatrix) -> CsrMatrix {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut acc = vec![0.0; other.cols];
        let mut marker = vec![usize::MAX; other.cols];
        let mut row_ptr = vec![0usize; self.rows + 1];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut touched: Vec<usize> = Vec::new();
        for i in 0..self.rows {
            touched.clear();
            let (ac, av) = self.row(i);
            for (&k, &a) in ac.iter().zip(av) {
                let (bc, bv) = other.row(k);
                for (&j, &b) in bc.iter().zip(bv) {
                    if marker[j] != i {
                        marker[j] = i;
                        acc[j] = 0.0;
                        touched.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            touched.sort_unstable();
            for &j in &touched {
                col_idx.push(j);
                values.push(acc[j]);
            }
            row_ptr[i + 1] = col_idx.len();
        }
        CsrMatrix {
            rows: self.rows,
            cols: other.cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// `self * diag(d)`
    pub fn scale_columns(&self, d: &[f64]) -> CsrMatrix {
        assert_eq!(d.len(), self.cols);
        let mut out = self.clone();
        for (v, &j) in out.values.iter_mut().zip(&self.col_idx) {
            *v *= d[j];
        }
        out
    }

    /// `diag(d) * self`
    pub fn scale_rows(&self, d: &[f64]) -> CsrMatrix {
        assert_eq!(d.len(), self.rows);
        let mut out = self.clone();
        for (i, &di) in d.iter().enumerate() {
            for v in &mut out.values[self.row_ptr[i]..self.row_ptr[i + 1]] {
                *v *= di;
            }
        }
        out
    }

    /// `alpha * self + beta * other`
    pub fn linear_combination(&self, alpha: f64, other: &CsrMatrix, beta: f64) -> CsrMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut b = TripletBuilder::new(self.rows, self.cols);
        for (m, s) in [(self, alpha), (other, beta)] {
            for i in 0..m.rows {
                let (c, v) = m.row(i);
                for (&j, &x) in c.iter().zip(v) {
                    b.push(i, j, s * x);
                }
            }
        }
        b.build()
    }

    /// Largest `|a_ij - a_ji|` relative to the largest stored magnitude.
    pub fn asymmetry(&self) -> f64 {
        if self.rows != self.cols {
            return f64::INFINITY;
        }
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let mut d = 0.0_f64;
        for i in 0..self.rows {
            let (c, v) = self.row(i);
            for (&j, &x) in c.iter().zip(v) {
                d = d.max((x - self.get(j, i)).abs());
            }
        }
        d / scale
    }

    /// `(self + self^T) / 2`
    pub fn symmetrized(&self) -> CsrMatrix {
        self.linear_combination(0.5, &self.transpose(), 0.5)
    }
}

impl MatVec for CsrMatrix {
    fn dim(&self) -> usize {
        assert_eq!(self.rows, self.cols, "MatVec requires a square matrix");
        self.rows
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        self.mul_vec_into(x, y);
    }
}

/// Square sparse matrix that is symmetric to within `1e-13` relative.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSymMatrix {
    inner: CsrMatrix,
}

impl SparseSymMatrix {
    pub fn new(m: CsrMatrix) -> Result<Self> {
        Self::with_tolerance(m, SYMMETRY_TOL)
    }

    /// Accepts `m` if its relative asymmetry is below `tol`, then stores
    /// the exactly symmetrized matrix.
    pub fn with_tolerance(m: CsrMatrix, tol: f64) -> Result<Self> {
        if m.rows() != m.cols() || m.rows() == 0 {
            return Err(Error::input(format!(
                "symmetric matrix must be square and non-empty, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        let asym = m.asymmetry();
        if asym > tol {
            return Err(Error::Internal(format!(
                "matrix asymmetry {asym:.3e} exceeds tolerance {tol:.1e}"
            )));
        }
        let inner = if asym == 0.0 { m } else { m.symmetrized() };
        Ok(Self { inner })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            inner: CsrMatrix::identity(n),
        }
    }

    pub fn from_diagonal(d: &[f64]) -> Self {
        Self {
            inner: CsrMatrix::from_diagonal(d),
        }
    }

    pub fn from_dense(m: &DenseMatrix) -> Result<Self> {
        Self::new(CsrMatrix::from_dense(m))
    }

    /// Symmetric tridiagonal matrix with constant diagonal and off-diagonal.
    pub fn tridiagonal(n: usize, diag: f64, off: f64) -> Self {
        let mut b = TripletBuilder::new(n, n);
        for i in 0..n {
            b.push(i, i, diag);
            if i + 1 < n {
                b.push(i, i + 1, off);
                b.push(i + 1, i, off);
            }
        }
        Self { inner: b.build() }
    }

    pub fn n(&self) -> usize {
        self.inner.rows()
    }

    pub fn csr(&self) -> &CsrMatrix {
        &self.inner
    }

    pub fn into_csr(self) -> CsrMatrix {
        self.inner
    }

    pub fn to_dense(&self) -> DenseMatrix {
        self.inner.to_dense()
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            inner: self.inner.linear_combination(alpha, &self.inner, 0.0),
        }
    }
}

impl MatVec for SparseSymMatrix {
    fn dim(&self) -> usize {
        self.n()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        self.inner.mul_vec_into(x, y);
    }
}

/// Rows of `M` restricted to a column subset, with empty rows dropped.
///
/// Used for `M P x` and `M (I - P) x` where `P` is a 0/1 diagonal mask, so
/// that products touching only the fine unknowns cost only as much as the
/// fine part of the matrix.
#[derive(Clone, Debug)]
pub struct ColumnSplit {
    n_rows: usize,
    rows: Vec<usize>,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl ColumnSplit {
    pub fn new(m: &CsrMatrix, keep_column: impl Fn(usize) -> bool) -> Self {
        let mut rows = Vec::new();
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for i in 0..m.rows() {
            let (c, v) = m.row(i);
            let before = col_idx.len();
            for (&j, &x) in c.iter().zip(v) {
                if keep_column(j) {
                    col_idx.push(j);
                    values.push(x);
                }
            }
            if col_idx.len() > before {
                rows.push(i);
                row_ptr.push(col_idx.len());
            }
        }
        Self {
            n_rows: m.rows(),
            rows,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    /// Indices of rows with at least one retained entry.
    pub fn active_rows(&self) -> &[usize] {
        &self.rows
    }

    /// `y <- y + alpha M_S x` over the retained columns.
    pub fn apply_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        for (r, &i) in self.rows.iter().enumerate() {
            let (a, b) = (self.row_ptr[r], self.row_ptr[r + 1]);
            let mut s = 0.0;
            for (v, &j) in self.values[a..b].iter().zip(&self.col_idx[a..b]) {
                s += v * x[j];
            }
            y[i] += alpha * s;
        }
    }

    /// `y <- M_S x` (rows outside the active set are zeroed).
    pub fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        self.apply_add(1.0, x, y);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed() {
        let mut b = TripletBuilder::new(2, 2);
        b.push(0, 0, 1.0);
        b.push(0, 0, 2.0);
        b.push(1, 0, -1.0);
        let m = b.build();
        assert_eq!(m.get(0, 0), 3.0);
        assert_eq!(m.get(1, 0), -1.0);
        assert_eq!(m.get(0, 1), 0.0);
        assert_eq!(m.nnz(), 2);
    }

    #[test]
    fn product_matches_dense() {
        let a = SparseSymMatrix::tridiagonal(4, 2.0, -1.0).into_csr();
        let p = a.mul(&a).to_dense();
        let d = a.to_dense().mul(&a.to_dense());
        assert_eq!(p, d);
    }

    #[test]
    fn asymmetric_input_rejected() {
        let mut b = TripletBuilder::new(2, 2);
        b.push(0, 1, 1.0);
        assert!(SparseSymMatrix::new(b.build()).is_err());
    }

    #[test]
    fn column_split_partitions_product() {
        let a = SparseSymMatrix::tridiagonal(5, 2.0, -1.0).into_csr();
        let fine = |j: usize| j >= 3;
        let f = ColumnSplit::new(&a, fine);
        let c = ColumnSplit::new(&a, |j| !fine(j));
        let x = [1.0, -2.0, 3.0, 0.5, 4.0];
        let mut y = vec![0.0; 5];
        f.apply_add(1.0, &x, &mut y);
        c.apply_add(1.0, &x, &mut y);
        let full = a.matvec(&x).unwrap();
        assert_eq!(y, full);
        assert_eq!(f.active_rows(), &[2, 3, 4]);
    }
}
