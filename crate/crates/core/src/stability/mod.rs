//! CFL stability: spectral scans of `(dt^2 / 4) A_p`, empirical growth
//! probes for every scheme, and overlap studies.

mod empirical;

pub use empirical::{
    empirical_max_step, empirical_scan, AdamsTrial, GrowthProbe, GrowthTrial, LeapfrogTrial,
    DEFAULT_SEED, SEED_ENV,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fem1d::FineMask;
use crate::integrators::build_ap;
use crate::numkit::{
    dense_sym_spectrum_capped, sym_lambda_extremes, SparseSymMatrix, DEFAULT_EIGEN_MAX_ITER,
};

/// Upper end of the admissible band for eigenvalues of `(dt^2 / 4) A_p`.
pub const UPPER_MARGIN: f64 = 1e-12;
/// Roundoff allowance below zero for eigenvalues of `(dt^2 / 4) A_p`.
pub const LOWER_TOL: f64 = 1e-10;
/// Default bisection resolution on `nu`.
pub const DEFAULT_REFINE_TOL: f64 = 0.005;

const LANCZOS_TOL: f64 = 1e-10;

/// One grid point of a scan.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanPoint {
    pub nu: f64,
    pub stable: bool,
    /// Offending eigenvalue (spectral scans) or worst growth factor (empirical scans).
    pub indicator: f64,
}

/// Verdicts over a grid of `nu = dt / dt_ref`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityScan {
    pub scheme: String,
    pub p: usize,
    pub overlap: usize,
    pub reference_dt: f64,
    pub points: Vec<ScanPoint>,
    /// Largest stable `nu` below the first unstable grid point, refined by bisection.
    pub nu_max: f64,
    /// Whether no stable grid point follows an unstable one.
    pub monotone: bool,
}

impl StabilityScan {
    pub fn max_stable_dt(&self) -> f64 {
        self.nu_max * self.reference_dt
    }
}

/// How eigenvalues are obtained in spectral scans.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectrumMethod {
    /// Full Jacobi spectrum; larger systems are a size error.
    Dense { cap: usize },
    /// Extreme eigenvalues by Lanczos.
    Lanczos,
    /// Dense up to `cap` unknowns, Lanczos above.
    Auto { cap: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanOptions {
    pub grid: Vec<f64>,
    pub refine_tol: f64,
    pub method: SpectrumMethod,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            grid: default_grid(),
            refine_tol: DEFAULT_REFINE_TOL,
            method: SpectrumMethod::Auto { cap: 600 },
        }
    }
}

/// `nu = 0.02, 0.04, ..., 1.2`
pub fn default_grid() -> Vec<f64> {
    (1..=60).map(|i| i as f64 * 0.02).collect()
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::input("empty nu grid"));
    }
    if grid.iter().any(|&v| !(v > 0.0 && v.is_finite())) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::input(
            "nu grid must be positive and strictly ascending",
        ));
    }
    Ok(())
}

/// `lambda_max(A)` by Lanczos.
pub fn lambda_max(a: &SparseSymMatrix) -> Result<f64> {
    Ok(sym_lambda_extremes(a, LANCZOS_TOL, DEFAULT_EIGEN_MAX_ITER.max(2 * a.n()))?.lambda_max)
}

fn reference_from(lmax: f64, c: f64) -> Result<f64> {
    if !(lmax > 0.0) {
        return Err(Error::Degenerate(format!(
            "lambda_max = {lmax:.3e}; no finite CFL bound"
        )));
    }
    Ok(c / lmax.sqrt())
}

/// `dt_LF = 2 / sqrt(lambda_max(A))`
pub fn lf_reference_step(a: &SparseSymMatrix) -> Result<f64> {
    reference_from(lambda_max(a)?, 2.0)
}

/// `dt_ME4 = sqrt(12) / sqrt(lambda_max(A))`, the bound of the global
/// modified-equation scheme.
pub fn me4_reference_step(a: &SparseSymMatrix) -> Result<f64> {
    reference_from(lambda_max(a)?, 12f64.sqrt())
}

/// Evaluates `verdict` on the grid, then bisects between the last stable and
/// the first unstable grid point.
pub(crate) fn scan_grid(
    grid: &[f64],
    refine_tol: f64,
    mut verdict: impl FnMut(f64) -> Result<(bool, f64)>,
) -> Result<(Vec<ScanPoint>, f64, bool)> {
    check_grid(grid)?;
    if !(refine_tol > 0.0) {
        return Err(Error::input("refinement tolerance must be positive"));
    }
    let mut points = Vec::with_capacity(grid.len());
    for &nu in grid {
        let (stable, indicator) = verdict(nu)?;
        points.push(ScanPoint {
            nu,
            stable,
            indicator,
        });
    }
    let first_bad = points.iter().position(|p| !p.stable);
    let monotone = match first_bad {
        Some(i) => points[i..].iter().all(|p| !p.stable),
        None => true,
    };
    let nu_max = match first_bad {
        None => *grid.last().expect("non-empty grid"),
        Some(i) => {
            let mut lo = if i == 0 { 0.0 } else { grid[i - 1] };
            let mut hi = grid[i];
            while hi - lo > refine_tol {
                let mid = 0.5 * (lo + hi);
                if verdict(mid)?.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        }
    };
    Ok((points, nu_max, monotone))
}

/// Extreme eigenvalues of `s A` for symmetric `A`.
fn extremes(a: &SparseSymMatrix, s: f64, method: SpectrumMethod) -> Result<(f64, f64)> {
    let dense = |cap: usize| -> Result<(f64, f64)> {
        let ev = dense_sym_spectrum_capped(a, cap)?;
        Ok((s * ev[0], s * ev[ev.len() - 1]))
    };
    match method {
        SpectrumMethod::Dense { cap } => dense(cap),
        SpectrumMethod::Auto { cap } if a.n() <= cap => dense(cap),
        _ => {
            let e = sym_lambda_extremes(a, LANCZOS_TOL, DEFAULT_EIGEN_MAX_ITER.max(2 * a.n()))?;
            Ok((s * e.lambda_min, s * e.lambda_max))
        }
    }
}

/// Spectral verdict for LTS-LF2(p) at each `nu`, with `dt = nu * dt_ref`:
/// stable iff the spectrum of `(dt^2 / 4) A_p` lies in `[0, 1 - 1e-12]`
/// (with a `1e-10` roundoff allowance below zero).
pub fn spectral_scan_lf2(
    a: &SparseSymMatrix,
    mask: &FineMask,
    p: usize,
    dt_ref: f64,
    opts: &ScanOptions,
) -> Result<StabilityScan> {
    if !(dt_ref > 0.0) {
        return Err(Error::input("reference step must be positive"));
    }
    let (points, nu_max, monotone) = scan_grid(&opts.grid, opts.refine_tol, |nu| {
        let dt = nu * dt_ref;
        let ap = build_ap(a, mask, p, dt)?;
        let (lo, hi) = extremes(&ap, 0.25 * dt * dt, opts.method)?;
        let stable = lo >= -LOWER_TOL && hi <= 1.0 - UPPER_MARGIN;
        let indicator = if lo < -LOWER_TOL { lo } else { hi };
        Ok((stable, indicator))
    })?;
    Ok(StabilityScan {
        scheme: "lf2".into(),
        p,
        overlap: mask.overlap(),
        reference_dt: dt_ref,
        points,
        nu_max,
        monotone,
    })
}

/// `nu_max` over a grid of refinement ratios and overlaps.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OverlapTable {
    pub p_values: Vec<usize>,
    pub e_values: Vec<usize>,
    /// `nu_max[i][j]` for `p_values[i]`, `e_values[j]`.
    pub nu_max: Vec<Vec<f64>>,
}

/// Tabulates `nu_max(p, e)` using any scan.
pub fn overlap_study(
    p_values: &[usize],
    e_values: &[usize],
    mut nu_max: impl FnMut(usize, usize) -> Result<f64>,
) -> Result<OverlapTable> {
    if p_values.is_empty() || e_values.is_empty() {
        return Err(Error::input("overlap study needs at least one p and one e"));
    }
    let mut table = Vec::with_capacity(p_values.len());
    for &p in p_values {
        let mut row = Vec::with_capacity(e_values.len());
        for &e in e_values {
            row.push(nu_max(p, e)?);
        }
        table.push(row);
    }
    Ok(OverlapTable {
        p_values: p_values.to_vec(),
        e_values: e_values.to_vec(),
        nu_max: table,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem1d::{
        assemble_cg, build_fine_mask, build_three_region_mesh, normalize, BoundaryCondition,
        Coefficients, Mesh1D,
    };

    #[test]
    fn reference_steps() {
        assert!(
            (lf_reference_step(&SparseSymMatrix::from_diagonal(&[4.0])).unwrap() - 1.0).abs()
                < 1e-12
        );
        assert!(
            (lf_reference_step(&SparseSymMatrix::from_diagonal(&[1.0])).unwrap() - 2.0).abs()
                < 1e-12
        );
        let a = SparseSymMatrix::tridiagonal(30, 2.0, -1.0);
        let r1 = lf_reference_step(&a).unwrap();
        let r4 = lf_reference_step(&a.scaled(4.0)).unwrap();
        assert!((r1 / r4 - 2.0).abs() < 1e-9);
        let zero = SparseSymMatrix::from_diagonal(&[0.0, 0.0]);
        assert!(matches!(
            lf_reference_step(&zero),
            Err(Error::Degenerate(_))
        ));
    }

    fn cg_p1(h: f64, p: usize, e: usize) -> (SparseSymMatrix, FineMask, f64) {
        let mesh = build_three_region_mesh(h, p).unwrap();
        let coef = Coefficients::constant(&mesh, 1.0, 0.0).unwrap();
        let sd = assemble_cg(&mesh, 1, &coef, BoundaryCondition::Dirichlet).unwrap();
        let mask = build_fine_mask(&mesh, &sd, e);
        let sys = normalize(&sd, None).unwrap();
        let uni = Mesh1D::uniform(0.0, 6.0, (6.0 / h).round() as usize).unwrap();
        let cu = Coefficients::constant(&uni, 1.0, 0.0).unwrap();
        let su = normalize(
            &assemble_cg(&uni, 1, &cu, BoundaryCondition::Dirichlet).unwrap(),
            None,
        )
        .unwrap();
        (sys.a, mask, lf_reference_step(&su.a).unwrap())
    }

    #[test]
    fn p1_recovers_classical_bound() {
        let (a, _, _) = cg_p1(0.2, 1, 0);
        let dt_ref = lf_reference_step(&a).unwrap();
        let scan = spectral_scan_lf2(
            &a,
            &FineMask::none(a.n()),
            1,
            dt_ref,
            &ScanOptions::default(),
        )
        .unwrap();
        assert!(scan.monotone);
        assert!(scan.nu_max > 0.99 - DEFAULT_REFINE_TOL && scan.nu_max < 1.0);
    }

    #[test]
    fn lf2_overlap_raises_bound() {
        let opts = ScanOptions::default();
        let nu: Vec<f64> = (0..=2)
            .map(|e| {
                let (a, mask, dt_ref) = cg_p1(0.2, 4, e);
                spectral_scan_lf2(&a, &mask, 4, dt_ref, &opts)
                    .unwrap()
                    .nu_max
            })
            .collect();
        assert!(nu[0] < nu[1] && nu[1] < nu[2], "{nu:?}");
        assert!(nu[0] < 0.8 && nu[2] >= 0.95, "{nu:?}");
    }

    #[test]
    fn lf2_resonances_are_weak() {
        // Above the first unstable grid point the spectrum leaves [0, 1] only
        // by tiny amounts until close to the classical bound.
        let (a, mask, dt_ref) = cg_p1(0.2, 4, 0);
        let s = spectral_scan_lf2(&a, &mask, 4, dt_ref, &ScanOptions::default()).unwrap();
        assert!(!s.monotone);
        for pt in s.points.iter().filter(|pt| pt.nu < 0.8) {
            assert!(
                pt.indicator < 1.0 + 1e-3 && pt.indicator > -LOWER_TOL,
                "{pt:?}"
            );
        }
    }

    #[test]
    fn dense_cap_enforced() {
        let a = SparseSymMatrix::tridiagonal(20, 2.0, -1.0);
        let opts = ScanOptions {
            method: SpectrumMethod::Dense { cap: 10 },
            ..ScanOptions::default()
        };
        let r = spectral_scan_lf2(&a, &FineMask::none(20), 2, 1.0, &opts);
        assert!(matches!(r, Err(Error::SizeCap { .. })));
    }

    #[test]
    fn lanczos_and_dense_agree() {
        let (a, mask, dt_ref) = cg_p1(0.2, 3, 0);
        let mut opts = ScanOptions::default();
        let d = spectral_scan_lf2(&a, &mask, 3, dt_ref, &opts).unwrap();
        opts.method = SpectrumMethod::Lanczos;
        let l = spectral_scan_lf2(&a, &mask, 3, dt_ref, &opts).unwrap();
        assert!((d.nu_max - l.nu_max).abs() <= DEFAULT_REFINE_TOL);
    }

    #[test]
    fn overlap_table_shape() {
        let t = overlap_study(&[2, 3], &[0, 1, 2], |p, e| Ok((p * 10 + e) as f64)).unwrap();
        assert_eq!(
            t.nu_max,
            vec![vec![20.0, 21.0, 22.0], vec![30.0, 31.0, 32.0]]
        );
        assert!(overlap_study(&[], &[0], |_, _| Ok(0.0)).is_err());
    }

    #[test]
    fn grid_validation() {
        assert!(scan_grid(&[0.2, 0.1], 0.01, |_| Ok((true, 0.0))).is_err());
        let (_, nu, mono) =
            scan_grid(&[0.1, 0.2, 0.3, 0.4], 0.001, |nu| Ok((nu < 0.25, nu))).unwrap();
        assert!(mono && (nu - 0.25).abs() < 0.001);
        let (_, _, mono) = scan_grid(&[0.1, 0.2, 0.3], 0.01, |nu| Ok((nu != 0.2, nu))).unwrap();
        assert!(!mono);
    }
}
