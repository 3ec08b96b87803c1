//! Experiment drivers: convergence studies, energy traces, stability reports
//! and plain simulations of the damped test problem on `[0, 6]`, plus the
//! command-line front end.

mod cli;
mod config;
mod output;
mod problem;
mod runs;

pub use cli::cli_main;
pub use config::{parse_config, parse_scheme};
pub use output::{
    fmt_f64, write_coefficients_csv, write_energy_csv, write_error_report_csv, write_manifest,
    write_simulation_csv, write_stability_csv, Manifest,
};
pub use problem::{Problem, ProblemKind};
pub use runs::{
    reference_step, run_convergence, run_energy_trace, run_single, run_stability_report, simulate,
    EnergyPoint, EnergyTrace, ErrorReport, ErrorRow, FieldSample, RunSummary, SimulationResult,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem1d::{Flux, DEFAULT_PENALTY};
use crate::integrators::Scheme;

/// Spatial discretization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Discretization {
    Cg,
    Ipdg,
    NodalDg,
}

impl std::str::FromStr for Discretization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cg" => Ok(Self::Cg),
            "ipdg" | "ip-dg" => Ok(Self::Ipdg),
            "nodal-dg" | "nodal_dg" | "ndg" => Ok(Self::NodalDg),
            other => Err(Error::input(format!("unknown discretization '{other}'"))),
        }
    }
}

impl std::fmt::Display for Discretization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Cg => "cg",
            Self::Ipdg => "ipdg",
            Self::NodalDg => "nodal-dg",
        })
    }
}

/// How the time step is chosen for each mesh.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DtPolicy {
    /// Multiple of the scheme's reference step on the uniform coarse mesh.
    Fraction(f64),
    Fixed(f64),
}

/// Complete description of one experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub disc: Discretization,
    pub order: usize,
    pub scheme: Scheme,
    pub p: usize,
    pub overlap: usize,
    /// Coarse mesh sizes, coarsest first.
    pub h_coarse: Vec<f64>,
    pub sigma: f64,
    pub c: f64,
    pub penalty: f64,
    pub t_final: f64,
    pub dt: DtPolicy,
    pub flux: Flux,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            disc: Discretization::Cg,
            order: 1,
            scheme: Scheme::Lf2,
            p: 2,
            overlap: 0,
            h_coarse: vec![0.2, 0.1, 0.05, 0.025],
            sigma: 0.0,
            c: 1.0,
            penalty: DEFAULT_PENALTY,
            t_final: 10.0,
            dt: DtPolicy::Fraction(0.9),
            flux: Flux::Upwind,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.order == 0 {
            return Err(Error::input("order must be at least 1"));
        }
        if self.p == 0 {
            return Err(Error::input("refinement ratio p must be at least 1"));
        }
        if self.h_coarse.is_empty() {
            return Err(Error::input("at least one coarse mesh size is required"));
        }
        if self
            .h_coarse
            .iter()
            .any(|&h| !(h > 0.0 && h.is_finite() && h <= 2.0))
        {
            return Err(Error::input("coarse mesh sizes must lie in (0, 2]"));
        }
        if !(0.0..2.0 * std::f64::consts::PI).contains(&self.sigma) {
            return Err(Error::input("sigma must satisfy 0 <= sigma < 2 pi"));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::input("wave speed must be positive"));
        }
        if !(self.penalty > 0.0 && self.penalty.is_finite()) {
            return Err(Error::input("penalty must be positive"));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::input("final time must be positive"));
        }
        match self.dt {
            DtPolicy::Fraction(f) | DtPolicy::Fixed(f) if f > 0.0 && f.is_finite() => {}
            _ => return Err(Error::input("time step policy needs a positive value")),
        }
        if self.disc == Discretization::NodalDg && !self.scheme.is_multistep() {
            return Err(Error::Unsupported(
                "nodal DG is first order in time; use an Adams-Bashforth scheme".into(),
            ));
        }
        Ok(())
    }
}

/// `(u, v, w)` with `v = u_t` and `w = -u_x` for the damped standing wave
///
/// ```text
/// u = 2 exp(-sigma t / 2) / sqrt(4 pi^2 - sigma^2) sin(pi x) sin(t sqrt(4 pi^2 - sigma^2) / 2)
/// ```
pub fn exact_solution(x: f64, t: f64, sigma: f64) -> Result<(f64, f64, f64)> {
    check_sigma(sigma)?;
    Ok(exact_parts(x, t, sigma))
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma < 2.0 * std::f64::consts::PI) || sigma.is_nan() {
        return Err(Error::input(format!(
            "exact solution requires sigma < 2 pi, got {sigma}"
        )));
    }
    Ok(())
}

pub(crate) fn exact_parts(x: f64, t: f64, sigma: f64) -> (f64, f64, f64) {
    use std::f64::consts::PI;
    let root = (4.0 * PI * PI - sigma * sigma).sqrt();
    let amp = 2.0 / root;
    let omega = 0.5 * root;
    let decay = (-0.5 * sigma * t).exp();
    let (s, c) = (omega * t).sin_cos();
    let (sx, cx) = (PI * x).sin_cos();
    let u = amp * decay * sx * s;
    let v = amp * decay * sx * (omega * c - 0.5 * sigma * s);
    let w = -amp * PI * decay * cx * s;
    (u, v, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn exact_solution_values() {
        for i in 0..7 {
            let (u, _, _) = exact_solution(0.7 * i as f64, 0.0, 0.3).unwrap();
            assert_eq!(u, 0.0);
        }
        let (u, _, _) = exact_solution(0.5, 0.5, 0.0).unwrap();
        assert!((u - 1.0 / PI).abs() < 1e-15);
        let (u, _, _) = exact_solution(1.3, 2.1, 0.0).unwrap();
        assert!((u - (PI * 1.3).sin() * (PI * 2.1).sin() / PI).abs() < 1e-15);
        assert!(exact_solution(0.0, 0.0, 2.0 * PI).is_err());
    }

    #[test]
    fn exact_solution_derivatives() {
        let sigma = 0.1;
        let h = 1e-5;
        for &(x, t) in &[(0.3, 0.2), (2.7, 4.1), (5.1, 9.4)] {
            let (_, v, w) = exact_solution(x, t, sigma).unwrap();
            let ut = (exact_solution(x, t + h, sigma).unwrap().0
                - exact_solution(x, t - h, sigma).unwrap().0)
                / (2.0 * h);
            let ux = (exact_solution(x + h, t, sigma).unwrap().0
                - exact_solution(x - h, t, sigma).unwrap().0)
                / (2.0 * h);
            assert!((v - ut).abs() < 1e-8);
            assert!((w + ux).abs() < 1e-8);
        }
    }

    #[test]
    fn exact_solution_satisfies_pde() {
        let sigma = 0.4;
        let h = 1e-3;
        let u = |x: f64, t: f64| exact_parts(x, t, sigma).0;
        for &(x, t) in &[(0.4, 0.9), (3.3, 2.2)] {
            let utt = (u(x, t + h) - 2.0 * u(x, t) + u(x, t - h)) / (h * h);
            let uxx = (u(x + h, t) - 2.0 * u(x, t) + u(x - h, t)) / (h * h);
            let ut = exact_parts(x, t, sigma).1;
            assert!((utt + sigma * ut - uxx).abs() < 1e-5);
        }
    }

    #[test]
    fn config_validation() {
        assert!(RunConfig::default().validate().is_ok());
        let bad = RunConfig {
            sigma: 7.0,
            ..RunConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = RunConfig {
            disc: Discretization::NodalDg,
            ..RunConfig::default()
        };
        assert!(matches!(bad.validate(), Err(Error::Unsupported(_))));
        let bad = RunConfig {
            dt: DtPolicy::Fixed(-1.0),
            ..RunConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn discretization_names_round_trip() {
        for d in [
            Discretization::Cg,
            Discretization::Ipdg,
            Discretization::NodalDg,
        ] {
            assert_eq!(d.to_string().parse::<Discretization>().unwrap(), d);
        }
        assert!("fd".parse::<Discretization>().is_err());
    }
}
