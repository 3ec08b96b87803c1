//! Largest stable step of each LTS scheme relative to its global counterpart
//! on the three-region CG-P1 mesh.

use ltswave::harness::{run_stability_report, RunConfig};
use ltswave::integrators::Scheme;

fn main() -> ltswave::Result<()> {
    let p_values = [2, 4, 7];
    println!(
        "{:<8} {:>3} {:>3} {:>14} {:>8} {:>9}",
        "scheme", "p", "e", "reference dt", "nu_max", "monotone"
    );
    for (scheme, sigma) in [
        (Scheme::Lf2, 0.0),
        (Scheme::Lfcn2, 0.1),
        (Scheme::Ab(2), 0.1),
        (Scheme::Ab(3), 0.1),
        (Scheme::Ab(4), 0.1),
    ] {
        let cfg = RunConfig {
            scheme,
            sigma,
            h_coarse: vec![0.2],
            ..RunConfig::default()
        };
        for s in run_stability_report(&cfg, &p_values, &[0, 1])? {
            println!(
                "{:<8} {:>3} {:>3} {:>14.6e} {:>8.4} {:>9}",
                s.scheme, s.p, s.overlap, s.reference_dt, s.nu_max, s.monotone
            );
        }
    }
    Ok(())
}
