//! Error tables for the leap-frog family on the three-region mesh:
//! CG-P1 with LTS-LF2(2) and Gauss-Lobatto lumped CG-P3 with LTS-LFME4(2).

use ltswave::harness::{
    fmt_f64, run_convergence, Discretization, DtPolicy, ErrorReport, RunConfig,
};
use ltswave::integrators::Scheme;

fn print(title: &str, r: &ErrorReport) {
    println!("{title}");
    println!(
        "  {:>8} {:>6} {:>12} {:>8} {:>24} {:>6}",
        "h", "dofs", "dt", "steps", "L2 error", "rate"
    );
    for row in &r.rows {
        let rate = row.rate.map(|v| format!("{v:.3}")).unwrap_or_default();
        println!(
            "  {:>8} {:>6} {:>12.4e} {:>8} {:>24} {:>6}",
            row.h_coarse,
            row.n_dofs,
            row.dt,
            row.steps,
            fmt_f64(row.error),
            rate
        );
    }
    println!("  fitted rate {:.3}\n", r.fitted_rate);
}

fn main() -> ltswave::Result<()> {
    let lf2 = RunConfig {
        disc: Discretization::Cg,
        order: 1,
        scheme: Scheme::Lf2,
        p: 2,
        dt: DtPolicy::Fraction(0.5),
        ..RunConfig::default()
    };
    print("CG-P1, LTS-LF2(2), dt = 0.5 dt_LF", &run_convergence(&lf2)?);

    let me4 = RunConfig {
        order: 3,
        scheme: Scheme::Lfme4,
        dt: DtPolicy::Fraction(0.9),
        ..lf2
    };
    print(
        "CG-P3, LTS-LFME4(2), dt = 0.9 dt_ME4",
        &run_convergence(&me4)?,
    );
    Ok(())
}
