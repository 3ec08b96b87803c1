//! Spectral LTS-LF2(p) scans built directly from the assembly and stability
//! modules: how far the local time steps must reach into the coarse region.

use ltswave::fem1d::{
    assemble_cg, assemble_ipdg, build_fine_mask, build_three_region_mesh, normalize,
    BoundaryCondition, Coefficients, DEFAULT_PENALTY,
};
use ltswave::stability::{lf_reference_step, overlap_study, spectral_scan_lf2, ScanOptions};

fn main() -> ltswave::Result<()> {
    let h = 0.2;
    let p_values = [2, 3, 4, 5, 7];
    let e_values = [0, 1, 2];
    for (name, order) in [("CG-P1", 1), ("IP-DG P1", 1), ("CG-P3", 3)] {
        let uniform = build_three_region_mesh(h, 1)?;
        let assemble = |mesh: &_| {
            let coef = Coefficients::constant(mesh, 1.0, 0.0)?;
            if name.starts_with("IP") {
                assemble_ipdg(
                    mesh,
                    order,
                    &coef,
                    DEFAULT_PENALTY,
                    BoundaryCondition::Dirichlet,
                )
            } else {
                assemble_cg(mesh, order, &coef, BoundaryCondition::Dirichlet)
            }
        };
        let dt_lf = lf_reference_step(&normalize(&assemble(&uniform)?, None)?.a)?;
        let table = overlap_study(&p_values, &e_values, |p, e| {
            let mesh = build_three_region_mesh(h, p)?;
            let sd = assemble(&mesh)?;
            let mask = build_fine_mask(&mesh, &sd, e);
            let sys = normalize(&sd, None)?;
            Ok(spectral_scan_lf2(&sys.a, &mask, p, dt_lf, &ScanOptions::default())?.nu_max)
        })?;
        println!("{name}, h = {h}, dt_LF = {dt_lf:.5e}");
        println!(
            "  {:>3} {}",
            "p",
            e_values
                .map(|e| format!("{:>8}", format!("e={e}")))
                .join("")
        );
        for (p, row) in table.p_values.iter().zip(&table.nu_max) {
            println!(
                "  {p:>3} {}",
                row.iter().map(|v| format!("{v:>8.4}")).collect::<String>()
            );
        }
    }
    Ok(())
}
