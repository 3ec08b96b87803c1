//! Discrete energy of LTS-LF2(4) without damping, and its monotone decay
//! under LTS-LFCN2(1) with damping.

use ltswave::harness::{run_energy_trace, DtPolicy, RunConfig};
use ltswave::integrators::Scheme;

fn main() -> ltswave::Result<()> {
    let steps = 10_000;
    let lf2 = RunConfig {
        scheme: Scheme::Lf2,
        p: 4,
        h_coarse: vec![0.2],
        dt: DtPolicy::Fraction(0.5),
        ..RunConfig::default()
    };
    let trace = run_energy_trace(&lf2, steps)?;
    println!("LTS-LF2(4), sigma = 0, dt = {:.5e}", trace.dt);
    println!("  E_0 = {:.16e}", trace.points[0].energy);
    println!(
        "  max |E_n - E_0| / E_0 over {steps} steps: {:.3e}",
        trace.max_relative_drift()
    );

    let lfcn2 = RunConfig {
        scheme: Scheme::Lfcn2,
        p: 1,
        sigma: 0.1,
        dt: DtPolicy::Fraction(0.9),
        ..lf2
    };
    let trace = run_energy_trace(&lfcn2, steps)?;
    let last = trace.points.last().map(|p| p.energy).unwrap_or(f64::NAN);
    println!("LTS-LFCN2(1), sigma = 0.1, dt = {:.5e}", trace.dt);
    println!("  E_0 = {:.6e}, E_N = {last:.6e}", trace.points[0].energy);
    println!(
        "  largest relative increase between steps: {:.3e}",
        trace.max_relative_increase()
    );
    Ok(())
}
