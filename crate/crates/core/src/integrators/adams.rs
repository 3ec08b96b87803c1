//! Adams-Bashforth schemes for first-order systems `y' = B y`.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use super::{ab_coefficients, LtsConfig, Scheme};
use crate::error::{check_len, Error, Result};
use crate::fem1d::{FineMask, NormalizedSystem};
use crate::numkit::{ColumnSplit, CsrMatrix, DiagOrBlock, MatVec, SparseSymMatrix};

/// A linear operator `B` that can also be applied to the coarse part
/// `(I - P) y` or the fine part `P y` of its argument.
pub trait SplitOperator: MatVec {
    /// Fine flags, one per entry of `y`.
    fn fine_flags(&self) -> &[bool];

    /// Sorted indices of the fine entries.
    fn fine_indices(&self) -> &[usize];

    /// Sorted rows that `apply_fine_add` may change; contains every fine index.
    fn fine_rows(&self) -> &[usize];

    /// `out = B (I - P) y`
    fn apply_coarse_into(&self, y: &[f64], out: &mut [f64]);

    /// `out += alpha B P y`
    fn apply_fine_add(&self, alpha: f64, y: &[f64], out: &mut [f64]);

    /// `P y`
    fn restrict_fine(&self, y: &[f64]) -> Vec<f64> {
        y.iter()
            .zip(self.fine_flags())
            .map(|(&v, &f)| if f { v } else { 0.0 })
            .collect()
    }
}

/// Explicit sparse `B` with cached column splits.
#[derive(Clone, Debug)]
pub struct MatrixOperator {
    b: CsrMatrix,
    flags: Vec<bool>,
    fine_idx: Vec<usize>,
    fine_rows: Vec<usize>,
    coarse: ColumnSplit,
    fine: ColumnSplit,
}

impl MatrixOperator {
    pub fn new(b: CsrMatrix, mask: &FineMask) -> Result<Self> {
        if b.rows() != b.cols() {
            return Err(Error::input("B must be square"));
        }
        check_len(b.rows(), mask.len())?;
        let flags = mask.flags().to_vec();
        let coarse = ColumnSplit::new(&b, |j| !flags[j]);
        let fine = ColumnSplit::new(&b, |j| flags[j]);
        let fine_idx = indices(&flags);
        let fine_rows = sorted_union(&[&fine_idx, fine.active_rows()]);
        Ok(Self {
            b,
            flags,
            fine_idx,
            fine_rows,
            coarse,
            fine,
        })
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.b
    }
}

impl MatVec for MatrixOperator {
    fn dim(&self) -> usize {
        self.b.rows()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        self.b.mul_vec_into(x, y);
    }
}

impl SplitOperator for MatrixOperator {
    fn fine_flags(&self) -> &[bool] {
        &self.flags
    }

    fn fine_indices(&self) -> &[usize] {
        &self.fine_idx
    }

    fn fine_rows(&self) -> &[usize] {
        &self.fine_rows
    }

    fn apply_coarse_into(&self, y: &[f64], out: &mut [f64]) {
        self.coarse.apply_into(y, out);
    }

    fn apply_fine_add(&self, alpha: f64, y: &[f64], out: &mut [f64]) {
        self.fine.apply_add(alpha, y, out);
    }
}

/// `B = [[0, I], [-A, -D]]` acting on `y = (z, z')`, never assembled.
#[derive(Clone, Debug)]
pub struct ZFormOperator {
    n: usize,
    a: SparseSymMatrix,
    d: Option<DiagOrBlock>,
    flags: Vec<bool>,
    fine_idx: Vec<usize>,
    fine_rows: Vec<usize>,
    coarse_a: ColumnSplit,
    fine_a: ColumnSplit,
}

impl ZFormOperator {
    /// The mask applies to both `z` and `z'`. Source terms are not supported.
    pub fn new(sys: &NormalizedSystem, mask: &FineMask) -> Result<Self> {
        if sys.has_source() {
            return Err(Error::Unsupported(
                "Adams-Bashforth schemes support source-free systems only".into(),
            ));
        }
        let n = sys.n();
        check_len(n, mask.len())?;
        let zf = mask.flags();
        let coarse_a = ColumnSplit::new(sys.a.csr(), |j| !zf[j]);
        let fine_a = ColumnSplit::new(sys.a.csr(), |j| zf[j]);
        let mut flags = zf.to_vec();
        flags.extend_from_slice(zf);
        let d = sys.is_damped().then(|| sys.d.clone());
        let fine_z = indices(zf);
        let damped_rows: Vec<usize> = match &d {
            None => Vec::new(),
            Some(DiagOrBlock::Diag(_)) => fine_z.clone(),
            Some(DiagOrBlock::Block(b)) => {
                let off = b.offsets();
                (0..b.blocks().len())
                    .filter(|&k| (off[k]..off[k + 1]).any(|i| zf[i]))
                    .flat_map(|k| off[k]..off[k + 1])
                    .collect()
            }
        };
        let bottom: Vec<usize> = sorted_union(&[fine_a.active_rows(), &damped_rows])
            .into_iter()
            .map(|i| i + n)
            .collect();
        let fine_idx = indices(&flags);
        let fine_rows = sorted_union(&[&fine_z, &bottom, &fine_idx]);
        Ok(Self {
            n,
            a: sys.a.clone(),
            d,
            flags,
            fine_idx,
            fine_rows,
            coarse_a,
            fine_a,
        })
    }

    /// Number of `z` unknowns; the operator acts on `2n` entries.
    pub fn n(&self) -> usize {
        self.n
    }

    /// `(z, z')` stacked.
    pub fn stack(z: &[f64], zp: &[f64]) -> Vec<f64> {
        let mut y = z.to_vec();
        y.extend_from_slice(zp);
        y
    }

    /// Subtracts `D x_masked` from `out`, where only entries with `flags == keep` are kept.
    fn sub_damping(&self, alpha: f64, zp: &[f64], keep: bool, out: &mut [f64]) {
        if let (Some(DiagOrBlock::Diag(d)), true) = (&self.d, keep) {
            let e = d.entries();
            for &i in self.fine_idx.iter().take_while(|&&i| i < self.n) {
                out[i] -= alpha * e[i] * zp[i];
            }
            return;
        }
        if let Some(d) = &self.d {
            let masked: Vec<f64> = zp
                .iter()
                .zip(&self.flags[..self.n])
                .map(|(&v, &f)| if f == keep { v } else { 0.0 })
                .collect();
            let mut dz = vec![0.0; self.n];
            d.apply_into(&masked, &mut dz);
            out.iter_mut().zip(&dz).for_each(|(o, v)| *o -= alpha * v);
        }
    }
}

impl MatVec for ZFormOperator {
    fn dim(&self) -> usize {
        2 * self.n
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        let n = self.n;
        let (z, zp) = x.split_at(n);
        let (top, bottom) = y.split_at_mut(n);
        top.copy_from_slice(zp);
        self.a.apply_into(z, bottom);
        bottom.iter_mut().for_each(|v| *v = -*v);
        if let Some(d) = &self.d {
            let dz = d
                .matvec(zp)
                .expect("damping dimension checked at construction");
            bottom.iter_mut().zip(&dz).for_each(|(o, v)| *o -= v);
        }
    }
}

impl SplitOperator for ZFormOperator {
    fn fine_flags(&self) -> &[bool] {
        &self.flags
    }

    fn fine_indices(&self) -> &[usize] {
        &self.fine_idx
    }

    fn fine_rows(&self) -> &[usize] {
        &self.fine_rows
    }

    fn apply_coarse_into(&self, x: &[f64], y: &mut [f64]) {
        let n = self.n;
        let (z, zp) = x.split_at(n);
        let (top, bottom) = y.split_at_mut(n);
        for i in 0..n {
            top[i] = if self.flags[i] { 0.0 } else { zp[i] };
        }
        bottom.iter_mut().for_each(|v| *v = 0.0);
        self.coarse_a.apply_add(-1.0, z, bottom);
        self.sub_damping(1.0, zp, false, bottom);
    }

    fn apply_fine_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        let n = self.n;
        let (z, zp) = x.split_at(n);
        let (top, bottom) = y.split_at_mut(n);
        for &i in self.fine_idx.iter().take_while(|&&i| i < n) {
            top[i] += alpha * zp[i];
        }
        self.fine_a.apply_add(-alpha, z, bottom);
        self.sub_damping(alpha, zp, true, bottom);
    }
}

fn indices(flags: &[bool]) -> Vec<usize> {
    flags
        .iter()
        .enumerate()
        .filter(|(_, &f)| f)
        .map(|(i, _)| i)
        .collect()
}

fn sorted_union(parts: &[&[usize]]) -> Vec<usize> {
    let mut v: Vec<usize> = parts.iter().flat_map(|p| p.iter().copied()).collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// History for `k`-step methods at time `t_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiStepState {
    /// `y[l] = y_{n-l}` for `l = 0..k`.
    pub y: Vec<Vec<f64>>,
    /// `w[l - 1] = B (I - P) y_{n-l}` for `l = 1..k`.
    pub w: Vec<Vec<f64>>,
    /// `fine[l - 1] = P y_{n - l/p}` for `l = 1..k`.
    pub fine: Vec<Vec<f64>>,
    pub t_n: f64,
}

impl MultiStepState {
    /// History for global stepping only.
    pub fn new(y: Vec<Vec<f64>>, t_n: f64) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::State("empty history".into()));
        }
        for v in &y {
            check_len(y[0].len(), v.len())?;
        }
        Ok(Self {
            y,
            w: Vec::new(),
            fine: Vec::new(),
            t_n,
        })
    }

    /// History for local stepping; `w` is computed and `fine` is restricted to `P`.
    pub fn for_lts<B: SplitOperator + ?Sized>(
        op: &B,
        y: Vec<Vec<f64>>,
        fine: Vec<Vec<f64>>,
        t_n: f64,
    ) -> Result<Self> {
        let mut s = Self::new(y, t_n)?;
        check_len(op.dim(), s.y[0].len())?;
        for f in &fine {
            check_len(op.dim(), f.len())?;
        }
        s.w = s.y[1..]
            .iter()
            .map(|v| {
                let mut out = vec![0.0; op.dim()];
                op.apply_coarse_into(v, &mut out);
                out
            })
            .collect();
        s.fine = fine.iter().map(|f| op.restrict_fine(f)).collect();
        Ok(s)
    }

    /// Samples `y(t)` at `t_n - l dt` and `t_n - l dt / p`, `l = 0..k`.
    pub fn from_trajectory<B: SplitOperator + ?Sized>(
        op: &B,
        cfg: &LtsConfig,
        t_n: f64,
        y: impl Fn(f64) -> Vec<f64>,
    ) -> Result<Self> {
        let k = ab_order(cfg)?;
        let ys = (0..k).map(|l| y(t_n - l as f64 * cfg.dt)).collect();
        let fine = (1..k).map(|l| y(t_n - l as f64 * cfg.dtau())).collect();
        Self::for_lts(op, ys, fine, t_n)
    }

    /// Builds the history from `y0` at `t0` by RK4 with step `dt / p`;
    /// the returned state sits at `t0 + (k - 1) dt`.
    pub fn bootstrap_rk4<B: SplitOperator + ?Sized>(
        op: &B,
        y0: &[f64],
        t0: f64,
        cfg: &LtsConfig,
    ) -> Result<Self> {
        let k = ab_order(cfg)?;
        let p = cfg.p;
        let traj = rk4_bootstrap(op, y0, cfg.dtau(), (k - 1) * p)?;
        let last = (k - 1) * p;
        let ys = (0..k).map(|l| traj[last - l * p].clone()).collect();
        let fine = (1..k).map(|l| traj[last - l].clone()).collect();
        Self::for_lts(op, ys, fine, t0 + (k - 1) as f64 * cfg.dt)
    }

    pub fn current(&self) -> &[f64] {
        &self.y[0]
    }
}

fn ab_order(cfg: &LtsConfig) -> Result<usize> {
    match cfg.scheme {
        Scheme::Ab(k) if (2..=4).contains(&k) => Ok(k),
        other => Err(Error::SchemeMismatch(format!(
            "expected an Adams-Bashforth scheme, got {other}"
        ))),
    }
}

/// Position of each entry of `sub` (sorted) inside `all` (sorted).
fn positions(all: &[usize], sub: &[usize]) -> Result<Vec<usize>> {
    let mut out = Vec::with_capacity(sub.len());
    let mut t = 0;
    for &j in sub {
        while t < all.len() && all[t] < j {
            t += 1;
        }
        if t == all.len() || all[t] != j {
            return Err(Error::Internal(
                "fine index missing from the fine rows".into(),
            ));
        }
        out.push(t);
    }
    Ok(out)
}

type CoefTable = (Vec<f64>, Vec<Vec<f64>>);

fn coefficients(k: usize, p: usize) -> Result<CoefTable> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), CoefTable>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(c) = cache.lock().ok().and_then(|m| m.get(&(k, p)).cloned()) {
        return Ok(c);
    }
    let set = ab_coefficients(k, p)?;
    let c = (set.alpha_f64(), set.beta_f64());
    if let Ok(mut m) = cache.lock() {
        m.insert((k, p), c.clone());
    }
    Ok(c)
}

/// `y_{n+1} = y_n + dt B sum_j alpha_j y_{n-j}`
pub fn ab_step<B: MatVec + ?Sized>(
    op: &B,
    state: &MultiStepState,
    dt: f64,
    k: usize,
) -> Result<MultiStepState> {
    let (alpha, _) = coefficients(k, 1)?;
    if state.y.len() < k {
        return Err(Error::State(format!(
            "AB{k} needs {k} history entries, found {}",
            state.y.len()
        )));
    }
    let n = op.dim();
    check_len(n, state.y[0].len())?;
    let mut s = vec![0.0; n];
    for (a, y) in alpha.iter().zip(&state.y) {
        s.iter_mut().zip(y).for_each(|(si, yi)| *si += a * yi);
    }
    let bs = op.matvec(&s)?;
    let next: Vec<f64> = state.y[0]
        .iter()
        .zip(&bs)
        .map(|(y, b)| y + dt * b)
        .collect();
    let mut y = Vec::with_capacity(k);
    y.push(next);
    y.extend(state.y[..k - 1].iter().cloned());
    Ok(MultiStepState {
        y,
        w: Vec::new(),
        fine: Vec::new(),
        t_n: state.t_n + dt,
    })
}

/// One LTS-AB`k`(`p`) step.
pub fn lts_abk_step<B: SplitOperator + ?Sized>(
    op: &B,
    state: &MultiStepState,
    cfg: &LtsConfig,
) -> Result<MultiStepState> {
    let mut next = state.clone();
    lts_abk_advance(op, &mut next, cfg)?;
    Ok(next)
}

/// [`lts_abk_step`] in place; history buffers are rotated and reused.
pub fn lts_abk_advance<B: SplitOperator + ?Sized>(
    op: &B,
    state: &mut MultiStepState,
    cfg: &LtsConfig,
) -> Result<()> {
    let k = ab_order(cfg)?;
    let p = cfg.p;
    let tau = cfg.dtau();
    let n = op.dim();
    if state.y.len() < k || state.w.len() < k - 1 || state.fine.len() < k - 1 {
        return Err(Error::State(format!(
            "LTS-AB{k} needs {k} states, {} coarse products and {} fine history entries; found {}, {}, {}",
            k - 1,
            k - 1,
            state.y.len(),
            state.w.len(),
            state.fine.len()
        )));
    }
    check_len(n, state.y[0].len())?;
    let (alpha, beta) = coefficients(k, p)?;
    state.y.truncate(k);
    state.w.truncate(k - 1);
    state.fine.truncate(k - 1);

    let mut w_n = vec![0.0; n];
    op.apply_coarse_into(&state.y[0], &mut w_n);
    state.w.insert(0, w_n);

    // Substeps only change the rows reached by B P; every other row receives
    // the summed coarse increment once.
    let rows = op.fine_rows();
    let fine_idx = op.fine_indices();
    let fine_pos = positions(rows, fine_idx)?;
    let mut sub: Vec<Vec<f64>> = Vec::with_capacity(p + 1);
    sub.push(rows.iter().map(|&i| state.y[0][i]).collect());
    let mut s = vec![0.0; n];
    let mut acc = vec![0.0; n];
    let mut bm = vec![0.0; k];
    for m in 0..p {
        for (q, &j) in fine_idx.iter().enumerate() {
            let mut v = 0.0;
            for (l, &a) in alpha.iter().enumerate() {
                v += a * if m >= l {
                    sub[m - l][fine_pos[q]]
                } else {
                    state.fine[l - m - 1][j]
                };
            }
            s[j] = v;
        }
        op.apply_fine_add(tau, &s, &mut acc);
        for (b, &x) in bm.iter_mut().zip(&beta[m]) {
            *b = tau * x;
        }
        let mut next = Vec::with_capacity(rows.len());
        for (t, &i) in rows.iter().enumerate() {
            let mut v = sub[m][t] + acc[i];
            for (b, w) in bm.iter().zip(&state.w) {
                v += b * w[i];
            }
            acc[i] = 0.0;
            next.push(v);
        }
        sub.push(next);
    }

    let summed: Vec<f64> = (0..k)
        .map(|l| tau * (0..p).map(|m| beta[m][l]).sum::<f64>())
        .collect();
    let mut y_next = state.y.pop().unwrap_or_default();
    y_next.clear();
    y_next.extend_from_slice(&state.y[0]);
    for (b, w) in summed.iter().zip(&state.w) {
        y_next
            .iter_mut()
            .zip(w.iter())
            .for_each(|(y, v)| *y += b * v);
    }
    for (t, &i) in rows.iter().enumerate() {
        y_next[i] = sub[p][t];
    }
    state.y.insert(0, y_next);
    state.w.truncate(k - 1);

    // Entries off the fine indices stay zero, so old buffers can be refilled.
    let mut old: Vec<Option<Vec<f64>>> = std::mem::take(&mut state.fine)
        .into_iter()
        .map(Some)
        .collect();
    let mut fine: Vec<Option<Vec<f64>>> = (1..k)
        .map(|l| if p >= l { None } else { old[l - p - 1].take() })
        .collect();
    let mut pool = old.into_iter().flatten();
    for (idx, slot) in fine.iter_mut().enumerate() {
        let l = idx + 1;
        if slot.is_none() {
            let mut f = pool.next().unwrap_or_else(|| vec![0.0; n]);
            for (q, &j) in fine_idx.iter().enumerate() {
                f[j] = sub[p - l][fine_pos[q]];
            }
            *slot = Some(f);
        }
    }
    state.fine = fine.into_iter().flatten().collect();
    state.t_n += cfg.dt;
    Ok(())
}

/// One classical RK4 step for `y' = B y`.
pub fn rk4_step<B: MatVec + ?Sized>(op: &B, y: &[f64], h: f64) -> Result<Vec<f64>> {
    check_len(op.dim(), y.len())?;
    let stage = |base: &[f64], k: &[f64], c: f64| -> Vec<f64> {
        base.iter().zip(k).map(|(a, b)| a + c * b).collect()
    };
    let k1 = op.matvec(y)?;
    let k2 = op.matvec(&stage(y, &k1, 0.5 * h))?;
    let k3 = op.matvec(&stage(y, &k2, 0.5 * h))?;
    let k4 = op.matvec(&stage(y, &k3, h))?;
    Ok((0..y.len())
        .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

/// `steps` RK4 steps of size `h` from `y0`; returns `steps + 1` states including `y0`.
pub fn rk4_bootstrap<B: MatVec + ?Sized>(
    op: &B,
    y0: &[f64],
    h: f64,
    steps: usize,
) -> Result<Vec<Vec<f64>>> {
    if steps == 0 {
        return Err(Error::input("bootstrap needs at least one step"));
    }
    let mut out = Vec::with_capacity(steps + 1);
    out.push(y0.to_vec());
    for s in 0..steps {
        let next = rk4_step(op, &out[s], h)?;
        out.push(next);
    }
    Ok(out)
}
