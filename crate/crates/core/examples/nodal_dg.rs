//! First-order nodal DG with upwind flux, advanced by LTS-AB3(3), sampled
//! against the exact velocity and strain.

use ltswave::harness::{simulate, Discretization, RunConfig};
use ltswave::integrators::Scheme;

fn main() -> ltswave::Result<()> {
    let cfg = RunConfig {
        disc: Discretization::NodalDg,
        order: 2,
        scheme: Scheme::Ab(3),
        p: 3,
        sigma: 0.1,
        h_coarse: vec![0.1],
        t_final: 2.0,
        ..RunConfig::default()
    };
    let sim = simulate(&cfg)?;
    let s = &sim.summary;
    println!(
        "{} dofs, {} steps of {:.4e}, L2 error at T = {}: {:.3e}",
        s.n_dofs, s.steps, s.dt, s.t_final, s.error
    );
    for field in ["v", "w"] {
        let worst = sim
            .samples
            .iter()
            .filter(|x| x.field == field)
            .filter_map(|x| x.exact.map(|e| (x.numeric - e).abs()))
            .fold(0.0, f64::max);
        println!("  max nodal deviation in {field}: {worst:.3e}");
    }
    for x in sim.samples.iter().filter(|x| x.field == "v").step_by(24) {
        println!(
            "  v({:.3}) = {:+.6}  exact {:+.6}",
            x.x,
            x.numeric,
            x.exact.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
