use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use serde::Serialize;

use super::problem::{Problem, ProblemKind};
use super::{exact_parts, DtPolicy, RunConfig};
use crate::error::{Error, Result};
use crate::integrators::{
    build_ap, lts_abk_advance, lts_energy, lts_lf2_step, lts_lfcn2_step, lts_lfme4_step, LtsConfig,
    LtsSystem, MultiStepState, Scheme, SplitOperator, TwoStepState,
};
use crate::numkit::{norm2, CsrMatrix};
use crate::stability::{
    empirical_max_step, empirical_scan, lf_reference_step, me4_reference_step, spectral_scan_lf2,
    AdamsTrial, GrowthProbe, GrowthTrial, LeapfrogTrial, ScanOptions, ScanPoint, StabilityScan,
    DEFAULT_REFINE_TOL,
};

/// Growth factor over the exact solution's amplitude that counts as blow-up.
const BLOWUP_FACTOR: f64 = 1e3;

/// One row of a convergence table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorRow {
    pub h_coarse: f64,
    pub n_dofs: usize,
    pub dt: f64,
    pub steps: usize,
    pub error: f64,
    /// Rate against the previous row.
    pub rate: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorReport {
    pub rows: Vec<ErrorRow>,
    /// Least-squares slope of `log error` against `log h`.
    pub fitted_rate: f64,
}

impl ErrorReport {
    pub fn min_rate(&self) -> f64 {
        self.rows
            .iter()
            .filter_map(|r| r.rate)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Outcome of a single run to the final time.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSummary {
    pub h_coarse: f64,
    pub n_dofs: usize,
    pub dt: f64,
    pub steps: usize,
    pub t_final: f64,
    pub error: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergyPoint {
    pub step: usize,
    pub t: f64,
    pub energy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyTrace {
    pub dt: f64,
    pub points: Vec<EnergyPoint>,
}

impl EnergyTrace {
    /// `max |E_n - E_0| / E_0`.
    pub fn max_relative_drift(&self) -> f64 {
        let e0 = self.points[0].energy;
        self.points
            .iter()
            .map(|p| (p.energy - e0).abs())
            .fold(0.0, f64::max)
            / e0
    }

    /// Largest single-step increase relative to `E_0`; non-positive for a decaying trace.
    pub fn max_relative_increase(&self) -> f64 {
        let e0 = self.points[0].energy;
        self.points
            .windows(2)
            .map(|w| w[1].energy - w[0].energy)
            .fold(f64::NEG_INFINITY, f64::max)
            / e0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FieldSample {
    pub field: &'static str,
    pub x: f64,
    pub numeric: f64,
    /// Exact value, available for unit wave speed.
    pub exact: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimulationResult {
    pub summary: RunSummary,
    pub samples: Vec<FieldSample>,
}

fn check_exact(cfg: &RunConfig) -> Result<()> {
    if cfg.c != 1.0 {
        return Err(Error::input(
            "error measurement uses the exact solution, which needs c = 1",
        ));
    }
    Ok(())
}

fn reference_cache() -> &'static Mutex<HashMap<String, f64>> {
    static CACHE: OnceLock<Mutex<HashMap<String, f64>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Largest stable step of the matching global scheme on the uniform mesh of size `h`:
/// `2 / sqrt(lambda_max)` for leap-frog, `sqrt(12 / lambda_max)` for the
/// modified-equation scheme and an empirical growth search for Adams-Bashforth.
pub fn reference_step(cfg: &RunConfig, h: f64) -> Result<f64> {
    let uniform = Problem::build(cfg, h, 1, 0)?;
    match (cfg.scheme, &uniform.kind) {
        (Scheme::Lf2 | Scheme::Lfcn2, ProblemKind::Second { lts, .. }) => {
            lf_reference_step(&lts.system().a)
        }
        (Scheme::Lfme4, ProblemKind::Second { lts, .. }) => me4_reference_step(&lts.system().a),
        (Scheme::Ab(k), kind) => {
            let probe = GrowthProbe::default();
            let key = format!(
                "{}|{}|{}|{:x}|{:x}|{:x}|{:x}|{:?}|{:?}",
                cfg.disc,
                cfg.order,
                k,
                h.to_bits(),
                cfg.sigma.to_bits(),
                cfg.c.to_bits(),
                cfg.penalty.to_bits(),
                cfg.flux,
                probe.seeds
            );
            if let Some(&dt) = reference_cache().lock().expect("reference cache").get(&key) {
                return Ok(dt);
            }
            let dt = match kind {
                ProblemKind::Second { lts, .. } => {
                    let op = uniform.z_operator()?.expect("second-order problem");
                    let guess = 0.5 * lf_reference_step(&lts.system().a)?;
                    empirical_max_step(&AdamsTrial { op: &op, p: 1, k }, guess, &probe)?
                }
                ProblemKind::First { op, .. } => {
                    let guess = 0.5 / row_sum_bound(op.matrix());
                    empirical_max_step(&AdamsTrial { op, p: 1, k }, guess, &probe)?
                }
            };
            reference_cache()
                .lock()
                .expect("reference cache")
                .insert(key, dt);
            Ok(dt)
        }
        (_, ProblemKind::First { .. }) => Err(Error::Unsupported(
            "leap-frog schemes need a second-order discretization".into(),
        )),
    }
}

fn row_sum_bound(b: &CsrMatrix) -> f64 {
    (0..b.rows())
        .map(|i| b.row(i).1.iter().map(|v| v.abs()).sum::<f64>())
        .fold(f64::MIN_POSITIVE, f64::max)
}

fn step_bound(cfg: &RunConfig, h: f64) -> Result<f64> {
    match cfg.dt {
        DtPolicy::Fixed(dt) => Ok(dt),
        DtPolicy::Fraction(f) => Ok(f * reference_step(cfg, h)?),
    }
}

/// Largest `dt <= dt_max` that divides `t_final` into whole steps.
fn time_grid(t_final: f64, dt_max: f64) -> (f64, usize) {
    let steps = ((t_final / dt_max) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    (t_final / steps as f64, steps)
}

struct Guard {
    limit: f64,
    label: String,
}

impl Guard {
    fn check(&self, x: &[f64], t: f64) -> Result<()> {
        let n = norm2(x);
        if n <= self.limit {
            Ok(())
        } else {
            Err(Error::Instability(format!(
                "{}: |state| = {n:.3e} at t = {t:.6}",
                self.label
            )))
        }
    }
}

/// Time of the first displacement maximum of the exact solution.
fn peak_time(sigma: f64) -> f64 {
    use std::f64::consts::PI;
    PI / (4.0 * PI * PI - sigma * sigma).sqrt()
}

enum FinalState {
    Z(Vec<f64>),
    Y(Vec<f64>),
}

struct Integrated {
    state: FinalState,
    t: f64,
    dt: f64,
    steps: usize,
}

type TwoStepFn = fn(&LtsSystem, &TwoStepState, &LtsConfig) -> Result<TwoStepState>;

fn two_step_stepper(scheme: Scheme) -> Result<TwoStepFn> {
    match scheme {
        Scheme::Lf2 => Ok(lts_lf2_step),
        Scheme::Lfme4 => Ok(lts_lfme4_step),
        Scheme::Lfcn2 => Ok(lts_lfcn2_step),
        Scheme::Ab(_) => Err(Error::SchemeMismatch("not a two-step scheme".into())),
    }
}

fn integrate(cfg: &RunConfig, pb: &Problem) -> Result<Integrated> {
    let (dt, steps) = time_grid(cfg.t_final, step_bound(cfg, pb.h_coarse)?);
    let lcfg = LtsConfig::new(dt, cfg.p, cfg.scheme)?;
    let label = format!(
        "{} order {} {} p={} e={} h={} dt={:.6e}",
        cfg.disc, cfg.order, cfg.scheme, cfg.p, cfg.overlap, pb.h_coarse, dt
    );
    let t_peak = peak_time(cfg.sigma);
    match (cfg.scheme, &pb.kind) {
        (Scheme::Ab(k), kind) => {
            if steps < k - 1 {
                return Err(Error::input(
                    "final time too short for the multistep history",
                ));
            }
            let guard = Guard {
                limit: BLOWUP_FACTOR * norm2(&pb.exact_first_order(t_peak)?),
                label,
            };
            let y = match kind {
                ProblemKind::Second { .. } => {
                    let op = pb.z_operator()?.expect("second-order problem");
                    integrate_multistep(pb, &op, &lcfg, steps, &guard)?
                }
                ProblemKind::First { op, .. } => integrate_multistep(pb, op, &lcfg, steps, &guard)?,
            };
            Ok(Integrated {
                state: FinalState::Y(y),
                t: steps as f64 * dt,
                dt,
                steps,
            })
        }
        (scheme, ProblemKind::Second { lts, .. }) => {
            let step = two_step_stepper(scheme)?;
            let guard = Guard {
                limit: BLOWUP_FACTOR * norm2(&pb.exact_z(t_peak)?),
                label,
            };
            let mut s = TwoStepState::new(pb.exact_z(dt)?, pb.exact_z(0.0)?, dt)?;
            for n in 1..steps {
                s = step(lts, &s, &lcfg)?;
                guard.check(&s.z_n, (n + 1) as f64 * dt)?;
            }
            Ok(Integrated {
                state: FinalState::Z(s.z_n),
                t: steps as f64 * dt,
                dt,
                steps,
            })
        }
        (_, ProblemKind::First { .. }) => Err(Error::Unsupported(
            "leap-frog schemes need a second-order discretization".into(),
        )),
    }
}

fn integrate_multistep<B: SplitOperator + ?Sized>(
    pb: &Problem,
    op: &B,
    cfg: &LtsConfig,
    steps: usize,
    guard: &Guard,
) -> Result<Vec<f64>> {
    let Scheme::Ab(k) = cfg.scheme else {
        return Err(Error::SchemeMismatch(
            "expected an Adams-Bashforth scheme".into(),
        ));
    };
    let t0 = (k - 1) as f64 * cfg.dt;
    let ys = (0..k)
        .map(|l| pb.exact_first_order(t0 - l as f64 * cfg.dt))
        .collect::<Result<Vec<_>>>()?;
    let fine = (1..k)
        .map(|l| pb.exact_first_order(t0 - l as f64 * cfg.dtau()))
        .collect::<Result<Vec<_>>>()?;
    let mut s = MultiStepState::for_lts(op, ys, fine, t0)?;
    for n in k - 1..steps {
        lts_abk_advance(op, &mut s, cfg)?;
        guard.check(s.current(), (n + 1) as f64 * cfg.dt)?;
    }
    Ok(s.y.swap_remove(0))
}

/// Integrates the test problem on one mesh from projected exact data and
/// measures the L2 error at the final time.
pub fn run_single(cfg: &RunConfig, h: f64) -> Result<RunSummary> {
    cfg.validate()?;
    check_exact(cfg)?;
    let pb = Problem::build(cfg, h, cfg.p, cfg.overlap)?;
    let out = integrate(cfg, &pb)?;
    let error = match &out.state {
        FinalState::Z(z) => pb.error_z(z, out.t)?,
        FinalState::Y(y) => pb.error_first_order(y, out.t)?,
    };
    Ok(RunSummary {
        h_coarse: h,
        n_dofs: pb.n_dofs(),
        dt: out.dt,
        steps: out.steps,
        t_final: out.t,
        error,
    })
}

/// Errors over `cfg.h_coarse` (at least three sizes, strictly decreasing).
pub fn run_convergence(cfg: &RunConfig) -> Result<ErrorReport> {
    cfg.validate()?;
    check_exact(cfg)?;
    let hs = &cfg.h_coarse;
    if hs.len() < 3 {
        return Err(Error::input(
            "a convergence study needs at least three meshes",
        ));
    }
    if hs.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::input("mesh sizes must be strictly decreasing"));
    }
    let mut rows: Vec<ErrorRow> = Vec::with_capacity(hs.len());
    for &h in hs {
        let s = run_single(cfg, h)?;
        let rate = rows
            .last()
            .map(|prev| (prev.error / s.error).ln() / (prev.h_coarse / h).ln());
        rows.push(ErrorRow {
            h_coarse: h,
            n_dofs: s.n_dofs,
            dt: s.dt,
            steps: s.steps,
            error: s.error,
            rate,
        });
    }
    let fitted_rate = fitted_slope(
        &rows.iter().map(|r| r.h_coarse).collect::<Vec<_>>(),
        &rows.iter().map(|r| r.error).collect::<Vec<_>>(),
    );
    Ok(ErrorReport { rows, fitted_rate })
}

fn fitted_slope(h: &[f64], e: &[f64]) -> f64 {
    let x: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Discrete energy `E^{n+1/2}` along an LTS-LF2 or LTS-LFCN2 run on the
/// coarsest configured mesh, starting from the exact solution.
pub fn run_energy_trace(cfg: &RunConfig, steps: usize) -> Result<EnergyTrace> {
    cfg.validate()?;
    if !matches!(cfg.scheme, Scheme::Lf2 | Scheme::Lfcn2) {
        return Err(Error::SchemeMismatch(format!(
            "energy traces are defined for lf2 and lfcn2, not {}",
            cfg.scheme
        )));
    }
    if steps == 0 {
        return Err(Error::input("energy trace needs at least one step"));
    }
    let h = cfg.h_coarse[0];
    let pb = Problem::build(cfg, h, cfg.p, cfg.overlap)?;
    let lts = pb
        .lts()
        .ok_or_else(|| Error::Unsupported("energy needs a second-order problem".into()))?;
    let dt = step_bound(cfg, h)?;
    let lcfg = LtsConfig::new(dt, cfg.p, cfg.scheme)?;
    let ap = build_ap(&lts.system().a, lts.mask(), cfg.p, dt)?;
    let step = two_step_stepper(cfg.scheme)?;
    let mut s = TwoStepState::new(pb.exact_z(dt)?, pb.exact_z(0.0)?, dt)?;
    let mut points = Vec::with_capacity(steps + 1);
    points.push(EnergyPoint {
        step: 0,
        t: 0.5 * dt,
        energy: lts_energy(&s, &ap, dt)?,
    });
    for n in 1..=steps {
        s = step(lts, &s, &lcfg)?;
        let energy = lts_energy(&s, &ap, dt)?;
        if !energy.is_finite() {
            return Err(Error::Instability(format!("energy overflow at step {n}")));
        }
        points.push(EnergyPoint {
            step: n,
            t: (n as f64 + 0.5) * dt,
            energy,
        });
    }
    Ok(EnergyTrace { dt, points })
}

/// Stability scans on the coarsest configured mesh for every `(p, e)`.
///
/// LTS-LF2 is judged from the spectrum of `A_p`, LTS-LFME4 and LTS-LFCN2 by
/// growth probes over a grid of `dt / dt_ref`. For LTS-AB`k` the largest
/// stable step is searched directly; the scan then holds a single point at
/// the ratio to the global AB`k` bound.
pub fn run_stability_report(
    cfg: &RunConfig,
    p_values: &[usize],
    e_values: &[usize],
) -> Result<Vec<StabilityScan>> {
    cfg.validate()?;
    if p_values.is_empty() || e_values.is_empty() {
        return Err(Error::input(
            "stability report needs at least one p and one e",
        ));
    }
    let h = cfg.h_coarse[0];
    let dt_ref = reference_step(cfg, h)?;
    let probe = GrowthProbe::default();
    let mut scans = Vec::new();
    for &p in p_values {
        for &e in e_values {
            let pb = Problem::build(cfg, h, p, e)?;
            let scan = match (cfg.scheme, &pb.kind) {
                (Scheme::Lf2, ProblemKind::Second { lts, .. }) => spectral_scan_lf2(
                    &lts.system().a,
                    lts.mask(),
                    p,
                    dt_ref,
                    &ScanOptions::default(),
                )?,
                (scheme @ (Scheme::Lfme4 | Scheme::Lfcn2), ProblemKind::Second { lts, .. }) => {
                    let trial = LeapfrogTrial {
                        system: lts,
                        p,
                        scheme,
                    };
                    empirical_scan(
                        &trial,
                        &scheme.name(),
                        p,
                        e,
                        dt_ref,
                        &crate::stability::default_grid(),
                        DEFAULT_REFINE_TOL,
                        &probe,
                    )?
                }
                (Scheme::Ab(k), ProblemKind::Second { .. }) => {
                    let op = pb.z_operator()?.expect("second-order problem");
                    adams_ratio(&AdamsTrial { op: &op, p, k }, cfg.scheme, e, dt_ref, &probe)?
                }
                (Scheme::Ab(k), ProblemKind::First { op, .. }) => {
                    adams_ratio(&AdamsTrial { op, p, k }, cfg.scheme, e, dt_ref, &probe)?
                }
                (_, ProblemKind::First { .. }) => {
                    return Err(Error::Unsupported(
                        "leap-frog schemes need a second-order discretization".into(),
                    ))
                }
            };
            scans.push(scan);
        }
    }
    Ok(scans)
}

fn adams_ratio<B: SplitOperator + ?Sized>(
    trial: &AdamsTrial<'_, B>,
    scheme: Scheme,
    overlap: usize,
    dt_ref: f64,
    probe: &GrowthProbe,
) -> Result<StabilityScan> {
    let dt = empirical_max_step(trial, dt_ref, probe)?;
    let nu = dt / dt_ref;
    let indicator = trial.growth(dt, probe.seeds[0], probe)?;
    Ok(StabilityScan {
        scheme: scheme.name(),
        p: trial.p,
        overlap,
        reference_dt: dt_ref,
        points: vec![ScanPoint {
            nu,
            stable: true,
            indicator,
        }],
        nu_max: nu,
        monotone: true,
    })
}

/// Runs the configured scheme on the coarsest mesh and samples the final
/// field at the degrees of freedom.
pub fn simulate(cfg: &RunConfig) -> Result<SimulationResult> {
    cfg.validate()?;
    let h = cfg.h_coarse[0];
    let pb = Problem::build(cfg, h, cfg.p, cfg.overlap)?;
    let out = integrate(cfg, &pb)?;
    let exact_ok = cfg.c == 1.0;
    let t = out.t;
    let mut samples = Vec::new();
    let mut error = f64::NAN;
    match &pb.kind {
        ProblemKind::Second { sd, lts } => {
            let z = match &out.state {
                FinalState::Z(z) => z.clone(),
                FinalState::Y(y) => y[..pb.n_dofs()].to_vec(),
            };
            if exact_ok {
                error = pb.error_z(&z, t)?;
            }
            let u = lts.system().from_z(&z)?;
            for (i, &x) in sd.dof_coords.iter().enumerate() {
                let exact = exact_ok.then(|| exact_parts(x, t, cfg.sigma).0);
                samples.push(FieldSample {
                    field: "u",
                    x,
                    numeric: u[i],
                    exact,
                });
            }
        }
        ProblemKind::First { sd, .. } => {
            let FinalState::Y(y) = &out.state else {
                return Err(Error::Internal(
                    "first-order problem ended in z-form".into(),
                ));
            };
            if exact_ok {
                error = pb.error_first_order(y, t)?;
            }
            let mut field = vec![""; y.len()];
            for (map, name) in [(&sd.v_dofs, "v"), (&sd.w_dofs, "w")] {
                for g in map.elements.iter().flatten().flatten() {
                    field[*g] = name;
                }
            }
            for (i, &x) in sd.dof_coords.iter().enumerate() {
                let (_, v, w) = exact_parts(x, t, cfg.sigma);
                let exact = exact_ok.then_some(if field[i] == "v" { v } else { w });
                samples.push(FieldSample {
                    field: field[i],
                    x,
                    numeric: y[i],
                    exact,
                });
            }
        }
    }
    Ok(SimulationResult {
        summary: RunSummary {
            h_coarse: h,
            n_dofs: pb.n_dofs(),
            dt: out.dt,
            steps: out.steps,
            t_final: t,
            error,
        },
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::Discretization;

    fn short(scheme: Scheme, order: usize) -> RunConfig {
        RunConfig {
            scheme,
            order,
            h_coarse: vec![0.4, 0.2, 0.1],
            t_final: 1.0,
            dt: DtPolicy::Fraction(0.4),
            ..RunConfig::default()
        }
    }

    #[test]
    fn time_grid_hits_final_time() {
        let (dt, n) = time_grid(10.0, 0.3);
        assert_eq!(n, 34);
        assert!((dt * n as f64 - 10.0).abs() < 1e-12 && dt <= 0.3);
        assert_eq!(time_grid(1.0, 0.25).1, 4);
        assert_eq!(time_grid(1.0, 5.0).1, 1);
    }

    #[test]
    fn fitted_slope_recovers_power() {
        let h = [0.2, 0.1, 0.05];
        let e: Vec<f64> = h.iter().map(|x: &f64| 3.0 * x.powi(3)).collect();
        assert!((fitted_slope(&h, &e) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn lf2_convergence_short_horizon() {
        let r = run_convergence(&short(Scheme::Lf2, 1)).unwrap();
        assert_eq!(r.rows.len(), 3);
        assert!(r.rows[0].rate.is_none());
        assert!(r.min_rate() > 1.7, "{r:?}");
    }

    #[test]
    fn ab3_convergence_short_horizon() {
        let mut cfg = short(Scheme::Ab(3), 3);
        cfg.sigma = 0.1;
        cfg.dt = DtPolicy::Fraction(0.5);
        let r = run_convergence(&cfg).unwrap();
        assert!(r.fitted_rate > 2.6, "{r:?}");
    }

    #[test]
    fn oversized_step_reports_instability() {
        let mut cfg = short(Scheme::Lf2, 1);
        cfg.dt = DtPolicy::Fraction(1.5);
        cfg.t_final = 10.0;
        assert!(matches!(run_single(&cfg, 0.2), Err(Error::Instability(_))));
    }

    #[test]
    fn convergence_input_checks() {
        let mut cfg = short(Scheme::Lf2, 1);
        cfg.h_coarse = vec![0.2, 0.1];
        assert!(matches!(run_convergence(&cfg), Err(Error::Input(_))));
        cfg.h_coarse = vec![0.1, 0.2, 0.05];
        assert!(matches!(run_convergence(&cfg), Err(Error::Input(_))));
        cfg.h_coarse = vec![0.2, 0.1, 0.05];
        cfg.c = 2.0;
        assert!(matches!(run_convergence(&cfg), Err(Error::Input(_))));
        let damped_lf = RunConfig {
            sigma: 0.1,
            ..short(Scheme::Lf2, 1)
        };
        assert!(matches!(
            run_single(&damped_lf, 0.2),
            Err(Error::SchemeMismatch(_))
        ));
    }

    #[test]
    fn quadrature_refinement_is_negligible() {
        use crate::fem1d::l2_error_with_points;
        let cfg = RunConfig {
            order: 3,
            ..short(Scheme::Lf2, 3)
        };
        let pb = Problem::build(&cfg, 0.2, 2, 0).unwrap();
        let ProblemKind::Second { sd, lts } = &pb.kind else {
            unreachable!()
        };
        let t = 0.8;
        let u = lts.system().from_z(&pb.exact_z(0.3).unwrap()).unwrap();
        let f = |x: f64| exact_parts(x, t, 0.0).0;
        let base = l2_error_with_points(&pb.mesh, &sd.dofs, &u, f, cfg.order + 3);
        let doubled = l2_error_with_points(&pb.mesh, &sd.dofs, &u, f, 2 * (cfg.order + 3));
        assert!(((base - doubled) / doubled).abs() < 1e-3);
    }

    #[test]
    fn energy_trace_conserved_and_decaying() {
        let cfg = RunConfig {
            p: 3,
            dt: DtPolicy::Fraction(0.3),
            ..RunConfig::default()
        };
        let tr = run_energy_trace(&cfg, 2000).unwrap();
        assert_eq!(tr.points.len(), 2001);
        assert!(tr.max_relative_drift() < 1e-10);
        let damped = RunConfig {
            p: 1,
            sigma: 0.1,
            scheme: Scheme::Lfcn2,
            ..cfg
        };
        let tr = run_energy_trace(&damped, 2000).unwrap();
        assert!(tr.max_relative_increase() <= 0.0);
        assert!(tr.points.last().unwrap().energy < tr.points[0].energy);
        let me4 = RunConfig {
            scheme: Scheme::Lfme4,
            ..RunConfig::default()
        };
        assert!(run_energy_trace(&me4, 10).is_err());
    }

    #[test]
    fn stability_report_p1_sanity() {
        let cfg = RunConfig {
            h_coarse: vec![0.5],
            ..RunConfig::default()
        };
        let scans = run_stability_report(&cfg, &[1], &[0]).unwrap();
        assert!((scans[0].nu_max - 1.0).abs() < 0.01, "{}", scans[0].nu_max);
    }

    #[test]
    fn simulate_samples_fields() {
        let cfg = RunConfig {
            h_coarse: vec![0.25],
            t_final: 0.5,
            dt: DtPolicy::Fraction(0.5),
            ..RunConfig::default()
        };
        let r = simulate(&cfg).unwrap();
        assert_eq!(r.samples.len(), r.summary.n_dofs);
        assert!(r
            .samples
            .iter()
            .all(|s| s.field == "u" && s.exact.is_some()));
        let dg = RunConfig {
            disc: Discretization::NodalDg,
            scheme: Scheme::Ab(2),
            order: 2,
            h_coarse: vec![0.5],
            t_final: 0.2,
            dt: DtPolicy::Fixed(0.005),
            ..RunConfig::default()
        };
        let r = simulate(&dg).unwrap();
        let nv = r.samples.iter().filter(|s| s.field == "v").count();
        assert_eq!(2 * nv, r.samples.len());
        assert!(r.summary.error < 0.05, "{}", r.summary.error);
    }
}
