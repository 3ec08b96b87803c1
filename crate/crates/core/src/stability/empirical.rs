use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{scan_grid, StabilityScan};
use crate::error::{Error, Result};
use crate::integrators::{
    lts_abk_advance, lts_lf2_step, lts_lfcn2_step, lts_lfme4_step, LtsConfig, LtsSystem,
    MultiStepState, Scheme, SplitOperator, TwoStepState,
};
use crate::numkit::norm2;

/// Environment variable overriding the base seed of stability trials.
pub const SEED_ENV: &str = "LTSWAVE_SEED";
pub const DEFAULT_SEED: u64 = 0x1a5e_5eed;

/// Instability classification: a trial is unstable iff
/// `max_n |state_n| / |state_0|` exceeds `threshold` within `steps` steps
/// for any of the seeds.
#[derive(Clone, Debug, PartialEq)]
pub struct GrowthProbe {
    pub steps: usize,
    pub threshold: f64,
    pub seeds: Vec<u64>,
    /// Relative resolution of the bisection on `dt`.
    pub rel_tol: f64,
}

impl Default for GrowthProbe {
    fn default() -> Self {
        let base = std::env::var(SEED_ENV)
            .ok()
            .and_then(|s| s.trim().parse().ok())
            .unwrap_or(DEFAULT_SEED);
        Self::with_seed(base)
    }
}

impl GrowthProbe {
    pub fn with_seed(base: u64) -> Self {
        Self {
            steps: 5000,
            threshold: 1e3,
            seeds: vec![base, base.wrapping_add(1), base.wrapping_add(2)],
            rel_tol: 1e-3,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.steps < 1000 {
            return Err(Error::input("growth probes need at least 1000 steps"));
        }
        if !(self.rel_tol > 0.0) || !(self.threshold > 1.0) || self.seeds.is_empty() {
            return Err(Error::input("invalid growth probe settings"));
        }
        Ok(())
    }
}

/// Runs a scheme from seeded random data and reports `max_n |state_n| / |state_0|`.
/// Implementations may stop as soon as the ratio exceeds `probe.threshold`.
pub trait GrowthTrial {
    fn growth(&self, dt: f64, seed: u64, probe: &GrowthProbe) -> Result<f64>;
}

impl<F> GrowthTrial for F
where
    F: Fn(f64, u64, &GrowthProbe) -> Result<f64>,
{
    fn growth(&self, dt: f64, seed: u64, probe: &GrowthProbe) -> Result<f64> {
        self(dt, seed, probe)
    }
}

fn random_vec(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Leap-frog family on a source-free z-form system.
pub struct LeapfrogTrial<'a> {
    pub system: &'a LtsSystem,
    pub p: usize,
    pub scheme: Scheme,
}

impl GrowthTrial for LeapfrogTrial<'_> {
    fn growth(&self, dt: f64, seed: u64, probe: &GrowthProbe) -> Result<f64> {
        if self.system.system().has_source() {
            return Err(Error::input("growth probes require a source-free system"));
        }
        let cfg = LtsConfig::new(dt, self.p, self.scheme)?;
        let step = match self.scheme {
            Scheme::Lf2 => lts_lf2_step,
            Scheme::Lfme4 => lts_lfme4_step,
            Scheme::Lfcn2 => lts_lfcn2_step,
            Scheme::Ab(_) => {
                return Err(Error::SchemeMismatch(
                    "leap-frog trial given an AB scheme".into(),
                ))
            }
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.system.n();
        let mut s = TwoStepState::new(random_vec(n, &mut rng), random_vec(n, &mut rng), 0.0)?;
        let pair = |s: &TwoStepState| norm2(&s.z_n).hypot(norm2(&s.z_nm1));
        let n0 = pair(&s);
        let mut worst = 1.0_f64;
        for _ in 0..probe.steps {
            s = step(self.system, &s, &cfg)?;
            let g = pair(&s) / n0;
            if !g.is_finite() {
                return Ok(f64::INFINITY);
            }
            worst = worst.max(g);
            if worst > probe.threshold {
                break;
            }
        }
        Ok(worst)
    }
}

/// LTS-AB`k`(`p`) on a split first-order operator.
pub struct AdamsTrial<'a, B: SplitOperator + ?Sized> {
    pub op: &'a B,
    pub p: usize,
    pub k: usize,
}

impl<B: SplitOperator + ?Sized> GrowthTrial for AdamsTrial<'_, B> {
    fn growth(&self, dt: f64, seed: u64, probe: &GrowthProbe) -> Result<f64> {
        let cfg = LtsConfig::new(dt, self.p, Scheme::Ab(self.k))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.op.dim();
        let y: Vec<Vec<f64>> = (0..self.k).map(|_| random_vec(n, &mut rng)).collect();
        let fine: Vec<Vec<f64>> = (1..self.k).map(|_| random_vec(n, &mut rng)).collect();
        let n0 = y.iter().map(|v| norm2(v)).fold(0.0, f64::max);
        let mut s = MultiStepState::for_lts(self.op, y, fine, 0.0)?;
        let mut worst = 1.0_f64;
        for _ in 0..probe.steps {
            lts_abk_advance(self.op, &mut s, &cfg)?;
            let g = norm2(&s.y[0]) / n0;
            if !g.is_finite() {
                return Ok(f64::INFINITY);
            }
            worst = worst.max(g);
            if worst > probe.threshold {
                break;
            }
        }
        Ok(worst)
    }
}

/// Worst growth over the probe's seeds, stopping at the first unstable seed.
fn worst_growth<T: GrowthTrial + ?Sized>(trial: &T, dt: f64, probe: &GrowthProbe) -> Result<f64> {
    let mut worst = 0.0_f64;
    for &seed in &probe.seeds {
        worst = worst.max(trial.growth(dt, seed, probe)?);
        if worst > probe.threshold {
            break;
        }
    }
    Ok(worst)
}

const MAX_BRACKET_MOVES: usize = 40;

/// Largest stable `dt`, to relative `probe.rel_tol`, found by bracketing
/// from `dt_guess` and bisecting.
pub fn empirical_max_step<T: GrowthTrial + ?Sized>(
    trial: &T,
    dt_guess: f64,
    probe: &GrowthProbe,
) -> Result<f64> {
    probe.validate()?;
    if !(dt_guess > 0.0 && dt_guess.is_finite()) {
        return Err(Error::input("initial step guess must be positive"));
    }
    let stable =
        |dt: f64| -> Result<bool> { Ok(worst_growth(trial, dt, probe)? <= probe.threshold) };
    let (mut lo, mut hi);
    if stable(dt_guess)? {
        lo = dt_guess;
        hi = 2.0 * dt_guess;
        let mut moves = 0;
        while stable(hi)? {
            lo = hi;
            hi *= 2.0;
            moves += 1;
            if moves == MAX_BRACKET_MOVES {
                return Err(Error::Bracket { lo, hi });
            }
        }
    } else {
        hi = dt_guess;
        lo = 0.5 * dt_guess;
        let mut moves = 0;
        while !stable(lo)? {
            hi = lo;
            lo *= 0.5;
            moves += 1;
            if moves == MAX_BRACKET_MOVES {
                return Err(Error::Bracket { lo, hi });
            }
        }
    }
    while (hi - lo) > probe.rel_tol * lo {
        let mid = 0.5 * (lo + hi);
        if stable(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Growth verdicts over a grid of `nu = dt / dt_ref`.
#[allow(clippy::too_many_arguments)]
pub fn empirical_scan<T: GrowthTrial + ?Sized>(
    trial: &T,
    scheme: &str,
    p: usize,
    overlap: usize,
    dt_ref: f64,
    grid: &[f64],
    refine_tol: f64,
    probe: &GrowthProbe,
) -> Result<StabilityScan> {
    probe.validate()?;
    if !(dt_ref > 0.0) {
        return Err(Error::input("reference step must be positive"));
    }
    let (points, nu_max, monotone) = scan_grid(grid, refine_tol, |nu| {
        let g = worst_growth(trial, nu * dt_ref, probe)?;
        Ok((g <= probe.threshold, g))
    })?;
    Ok(StabilityScan {
        scheme: scheme.to_string(),
        p,
        overlap,
        reference_dt: dt_ref,
        points,
        nu_max,
        monotone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem1d::{FineMask, NormalizedSystem};
    use crate::integrators::{ab_alpha, ZFormOperator};
    use crate::numkit::{DiagMatrix, DiagOrBlock, SparseSymMatrix};
    use num_traits::ToPrimitive;

    fn scalar_sys(lambda: f64, d: f64) -> NormalizedSystem {
        NormalizedSystem::from_parts(
            SparseSymMatrix::from_diagonal(&[lambda]),
            DiagOrBlock::Diag(DiagMatrix::new(vec![d])),
            None,
        )
        .unwrap()
    }

    #[test]
    fn leapfrog_bound_on_scalar() {
        let ls = LtsSystem::new(scalar_sys(4.0, 0.0), FineMask::none(1)).unwrap();
        let trial = LeapfrogTrial {
            system: &ls,
            p: 1,
            scheme: Scheme::Lf2,
        };
        let dt = empirical_max_step(&trial, 0.3, &GrowthProbe::with_seed(1)).unwrap();
        assert!((dt - 1.0).abs() < 0.02, "dt {dt}");
    }

    /// Largest |root| of the AB2 characteristic polynomial for `y' = i w y`.
    fn ab2_root(dt: f64, w: f64) -> f64 {
        let a = ab_alpha(2).unwrap();
        let (a0, a1) = (a[0].to_f64().unwrap(), a[1].to_f64().unwrap());
        // rho^2 - (1 + i x a0) rho - i x a1 = 0, x = w dt
        let x = w * dt;
        let (br, bi) = (1.0, x * a0);
        let (cr, ci) = (0.0, x * a1);
        // rho = (b +- sqrt(b^2 + 4c)) / 2
        let (dr, di) = (br * br - bi * bi + 4.0 * cr, 2.0 * br * bi + 4.0 * ci);
        let m = (dr * dr + di * di).sqrt();
        let sr = ((m + dr) / 2.0).sqrt();
        let si = ((m - dr) / 2.0).sqrt() * di.signum();
        let r1 = ((br + sr) / 2.0).hypot((bi + si) / 2.0);
        let r2 = ((br - sr) / 2.0).hypot((bi - si) / 2.0);
        r1.max(r2)
    }

    #[test]
    fn ab2_matches_companion_roots() {
        let w = 2.0_f64;
        let sys = scalar_sys(w * w, 0.0);
        let op = ZFormOperator::new(&sys, &FineMask::none(1)).unwrap();
        let probe = GrowthProbe::with_seed(4);
        let dt = empirical_max_step(
            &AdamsTrial {
                op: &op,
                p: 1,
                k: 2,
            },
            0.05,
            &probe,
        )
        .unwrap();
        // growth over N steps reaches the threshold where rho^N = threshold
        let target = probe.threshold.powf(1.0 / probe.steps as f64);
        let (mut lo, mut hi) = (1e-4, 1.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if ab2_root(mid, w) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!(
            (dt / lo - 1.0).abs() < 0.1,
            "empirical {dt}, companion {lo}"
        );
    }

    #[test]
    fn bracket_failure_reported() {
        let never = |_: f64, _: u64, _: &GrowthProbe| -> Result<f64> { Ok(f64::INFINITY) };
        assert!(matches!(
            empirical_max_step(&never, 1.0, &GrowthProbe::with_seed(0)),
            Err(Error::Bracket { .. })
        ));
    }

    #[test]
    fn scan_matches_spectral_for_lf2() {
        use crate::integrators::build_ap;
        use crate::stability::{spectral_scan_lf2, ScanOptions};
        let n = 30;
        let a = SparseSymMatrix::tridiagonal(n, 2.0, -1.0).scaled(100.0);
        let mask = FineMask::new((0..n).map(|i| (10..20).contains(&i)).collect(), 0);
        let _ = build_ap(&a, &mask, 3, 0.01).unwrap();
        let sys = NormalizedSystem::from_parts(
            a.clone(),
            DiagOrBlock::Diag(DiagMatrix::new(vec![0.0; n])),
            None,
        )
        .unwrap();
        let ls = LtsSystem::new(sys, mask.clone()).unwrap();
        let dt_ref = 2.0 / (4.0 * 100.0f64).sqrt();
        let spectrum = spectral_scan_lf2(&a, &mask, 3, dt_ref, &ScanOptions::default()).unwrap();
        let trial = LeapfrogTrial {
            system: &ls,
            p: 3,
            scheme: Scheme::Lf2,
        };
        let emp = empirical_max_step(&trial, 0.5 * dt_ref, &GrowthProbe::with_seed(9)).unwrap();
        let rel = (emp / dt_ref - spectrum.nu_max).abs() / spectrum.nu_max;
        assert!(
            rel < 0.05,
            "empirical {} vs spectral {}",
            emp / dt_ref,
            spectrum.nu_max
        );
    }
}
