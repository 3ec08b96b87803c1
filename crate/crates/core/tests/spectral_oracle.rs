//! The empirical LTS-AB bounds against the spectral radius of the one-step map.

use ltswave::harness::{reference_step, run_stability_report, Discretization, Problem, RunConfig};
use ltswave::integrators::{lts_abk_step, LtsConfig, MultiStepState, Scheme, SplitOperator};
use nalgebra::DMatrix;

/// Columns are the images of unit history vectors `(y_n, ..., y_{n-k+1}, P y at t_n - l dtau)`.
fn one_step_map<B: SplitOperator>(op: &B, cfg: &LtsConfig, k: usize) -> DMatrix<f64> {
    let n = op.dim();
    let dim = (2 * k - 1) * n;
    let mut m = DMatrix::zeros(dim, dim);
    for c in 0..dim {
        let mut v = vec![0.0; dim];
        v[c] = 1.0;
        let y = (0..k).map(|l| v[l * n..(l + 1) * n].to_vec()).collect();
        let fine = (1..k)
            .map(|l| v[(k + l - 1) * n..(k + l) * n].to_vec())
            .collect();
        let s = MultiStepState::for_lts(op, y, fine, 0.0).unwrap();
        let s = lts_abk_step(op, &s, cfg).unwrap();
        let out = s.y.iter().chain(&s.fine).flatten();
        for (r, x) in out.enumerate() {
            m[(r, c)] = *x;
        }
    }
    m
}

fn spectral_radius(m: DMatrix<f64>) -> f64 {
    m.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

fn spectral_max_step<B: SplitOperator>(op: &B, p: usize, k: usize, guess: f64) -> f64 {
    let ok = |dt: f64| {
        spectral_radius(one_step_map(
            op,
            &LtsConfig::new(dt, p, Scheme::Ab(k)).unwrap(),
            k,
        )) <= 1.0 + 1e-8
    };
    let (mut lo, mut hi) = (0.25 * guess, 1.5 * guess);
    assert!(ok(lo) && !ok(hi));
    while hi - lo > 1e-4 * lo {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[test]
fn ab2_bounds_agree_with_spectral_radius() {
    let cfg = RunConfig {
        disc: Discretization::Cg,
        scheme: Scheme::Ab(2),
        sigma: 0.1,
        h_coarse: vec![0.2],
        ..RunConfig::default()
    };
    let global = reference_step(&cfg, 0.2).unwrap();
    let uniform = Problem::build(&cfg, 0.2, 1, 0)
        .unwrap()
        .z_operator()
        .unwrap()
        .unwrap();
    let spectral_global = spectral_max_step(&uniform, 1, 2, global);
    // A finite growth probe cannot see arbitrarily slow growth, so it bounds from above.
    assert!(
        global >= spectral_global * (1.0 - 1e-3),
        "{global} < {spectral_global}"
    );
    assert!(
        global < 1.3 * spectral_global,
        "{global} vs {spectral_global}"
    );

    let scans = run_stability_report(&cfg, &[2, 4], &[0]).unwrap();
    for scan in &scans {
        let op = Problem::build(&cfg, 0.2, scan.p, 0)
            .unwrap()
            .z_operator()
            .unwrap()
            .unwrap();
        let dt = spectral_max_step(&op, scan.p, 2, scan.nu_max * global);
        let ratio = dt / spectral_global;
        assert!(
            (ratio - scan.nu_max).abs() < 3e-2,
            "p = {}: spectral {ratio}, empirical {}",
            scan.p,
            scan.nu_max
        );
    }
}
