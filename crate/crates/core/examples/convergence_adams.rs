//! LTS-AB4(p) convergence for P3 elements with several refinement ratios.
//!
//! ```text
//! cargo run --release --example convergence_adams -- ipdg 1 10
//! ```
//! Arguments: discretization (`cg`, `ipdg`, `nodal-dg`), overlap, final time.

use ltswave::harness::{run_convergence, Discretization, RunConfig};
use ltswave::integrators::Scheme;

fn main() -> ltswave::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let disc: Discretization = args
        .first()
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(Discretization::Cg);
    let overlap = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let t_final = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(10.0);
    let h_coarse = match disc {
        Discretization::NodalDg => vec![0.02, 0.01, 0.005],
        _ => vec![0.2, 0.1, 0.05, 0.025],
    };

    println!("{disc} P3, LTS-AB4(p), sigma = 0.1, overlap {overlap}, T = {t_final}");
    for p in [2, 5, 7] {
        let cfg = RunConfig {
            disc,
            order: 3,
            scheme: Scheme::Ab(4),
            p,
            overlap,
            sigma: 0.1,
            h_coarse: h_coarse.clone(),
            t_final,
            ..RunConfig::default()
        };
        let report = run_convergence(&cfg)?;
        let errors: Vec<String> = report
            .rows
            .iter()
            .map(|r| format!("{:.3e}", r.error))
            .collect();
        println!(
            "  p = {p}: errors [{}]  fitted rate {:.3}",
            errors.join(", "),
            report.fitted_rate
        );
    }
    Ok(())
}
