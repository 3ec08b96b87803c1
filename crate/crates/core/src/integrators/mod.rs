//! Global and local time-stepping schemes.
//!
//! Second-order schemes act on the z-form `z'' + D z' + A z = R(t)` through
//! [`LtsSystem`], which caches the column splits `A(I - P)` and `AP`.
//! Adams-Bashforth schemes act on a first-order system `y' = B y` through
//! [`SplitOperator`].

mod adams;
mod coefficients;
mod leapfrog;

pub use adams::{
    ab_step, lts_abk_advance, lts_abk_step, rk4_bootstrap, rk4_step, MatrixOperator,
    MultiStepState, SplitOperator, ZFormOperator,
};
pub use coefficients::{
    ab_alpha, ab_coefficients, gamma, gamma_exact, gamma_polynomial, gamma_tilde,
    gamma_tilde_exact, gamma_tilde_polynomial, AbCoefficientSet, AlphaPTable, MAX_GAMMA_INDEX,
};
pub use leapfrog::{
    build_ap, damped_leapfrog_step, leapfrog_step, lts_energy, lts_lf2_step, lts_lfcn2_step,
    lts_lfme4_step, me4_step, LtsSystem,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Time-integration scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    Lf2,
    Lfme4,
    Lfcn2,
    /// Adams-Bashforth of order `k` in `2..=4`.
    Ab(usize),
}

impl Scheme {
    /// Formal order of accuracy.
    pub fn order(self) -> usize {
        match self {
            Scheme::Lf2 | Scheme::Lfcn2 => 2,
            Scheme::Lfme4 => 4,
            Scheme::Ab(k) => k,
        }
    }

    pub fn is_multistep(self) -> bool {
        matches!(self, Scheme::Ab(_))
    }

    pub fn name(self) -> String {
        match self {
            Scheme::Lf2 => "lf2".into(),
            Scheme::Lfme4 => "lfme4".into(),
            Scheme::Lfcn2 => "lfcn2".into(),
            Scheme::Ab(k) => format!("ab{k}"),
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lf2" | "lf" => Ok(Scheme::Lf2),
            "lfme4" | "me4" => Ok(Scheme::Lfme4),
            "lfcn2" | "cn2" => Ok(Scheme::Lfcn2),
            "ab2" => Ok(Scheme::Ab(2)),
            "ab3" => Ok(Scheme::Ab(3)),
            "ab4" => Ok(Scheme::Ab(4)),
            other => Err(Error::input(format!("unknown scheme '{other}'"))),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.name())
    }
}

/// Global step, refinement ratio and scheme.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LtsConfig {
    pub dt: f64,
    pub p: usize,
    pub scheme: Scheme,
}

impl LtsConfig {
    pub fn new(dt: f64, p: usize, scheme: Scheme) -> Result<Self> {
        let cfg = Self { dt, p, scheme };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::input(format!(
                "time step must be positive, got {}",
                self.dt
            )));
        }
        if self.p == 0 {
            return Err(Error::input("refinement ratio p must be at least 1"));
        }
        if let Scheme::Ab(k) = self.scheme {
            if !(2..=4).contains(&k) {
                return Err(Error::input(format!(
                    "Adams-Bashforth order must be 2, 3 or 4, got {k}"
                )));
            }
        }
        Ok(())
    }

    /// Local step `dt / p`.
    pub fn dtau(&self) -> f64 {
        self.dt / self.p as f64
    }
}

/// `(z_n, z_{n-1})` at time `t_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoStepState {
    pub z_n: Vec<f64>,
    pub z_nm1: Vec<f64>,
    pub t_n: f64,
}

impl TwoStepState {
    pub fn new(z_n: Vec<f64>, z_nm1: Vec<f64>, t_n: f64) -> Result<Self> {
        crate::error::check_len(z_n.len(), z_nm1.len())?;
        Ok(Self { z_n, z_nm1, t_n })
    }

    /// Samples `z` at `t_n` and `t_n - dt`.
    pub fn from_trajectory(t_n: f64, dt: f64, z: impl Fn(f64) -> Vec<f64>) -> Result<Self> {
        Self::new(z(t_n), z(t_n - dt), t_n)
    }

    pub fn len(&self) -> usize {
        self.z_n.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z_n.is_empty()
    }
}

#[cfg(test)]
pub(crate) mod testutil {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use crate::fem1d::{FineMask, NormalizedSystem, Sampler};
    use crate::numkit::{DiagMatrix, DiagOrBlock, SparseSymMatrix, TripletBuilder};

    pub fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    /// Stiffness-like PSD tridiagonal matrix with random positive weights,
    /// scaled so that `lambda_max <= 4 * scale`.
    pub fn random_psd(n: usize, scale: f64, r: &mut ChaCha8Rng) -> SparseSymMatrix {
        let c: Vec<f64> = (0..=n).map(|_| r.gen_range(0.2..1.0) * scale).collect();
        let mut b = TripletBuilder::new(n, n);
        for i in 0..n {
            b.push(i, i, c[i] + c[i + 1]);
            if i + 1 < n {
                b.push(i, i + 1, -c[i + 1]);
                b.push(i + 1, i, -c[i + 1]);
            }
        }
        SparseSymMatrix::new(b.build()).unwrap()
    }

    pub fn random_mask(n: usize, r: &mut ChaCha8Rng) -> FineMask {
        FineMask::new((0..n).map(|_| r.gen_bool(0.4)).collect(), 0)
    }

    pub fn random_vec(n: usize, r: &mut ChaCha8Rng) -> Vec<f64> {
        (0..n).map(|_| r.gen_range(-1.0..1.0)).collect()
    }

    pub fn undamped(a: SparseSymMatrix, source: Option<Sampler>) -> NormalizedSystem {
        let n = a.n();
        NormalizedSystem::from_parts(a, DiagOrBlock::Diag(DiagMatrix::new(vec![0.0; n])), source)
            .unwrap()
    }

    pub fn damped(a: SparseSymMatrix, d: Vec<f64>, source: Option<Sampler>) -> NormalizedSystem {
        NormalizedSystem::from_parts(a, DiagOrBlock::Diag(DiagMatrix::new(d)), source).unwrap()
    }

    /// Least-squares slope of `log e` against `log h`.
    pub fn slope(h: &[f64], e: &[f64]) -> f64 {
        let x: Vec<f64> = h.iter().map(|v| v.ln()).collect();
        let y: Vec<f64> = e.iter().map(|v| v.ln()).collect();
        let n = x.len() as f64;
        let mx = x.iter().sum::<f64>() / n;
        let my = y.iter().sum::<f64>() / n;
        let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
        let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
        sxy / sxx
    }
}
