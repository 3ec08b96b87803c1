//! The integrators on a hand-built system: a spring chain whose middle
//! segment is four times stiffer, stepped with LTS-LF2(2) and compared with
//! global leap-frog at a step small enough for the stiff part.

use ltswave::fem1d::{FineMask, NormalizedSystem};
use ltswave::integrators::{
    leapfrog_step, lts_lf2_step, LtsConfig, LtsSystem, Scheme, TwoStepState,
};
use ltswave::numkit::{DiagMatrix, DiagOrBlock, SparseSymMatrix, TripletBuilder};
use ltswave::stability::lf_reference_step;

fn main() -> ltswave::Result<()> {
    let n = 60;
    let stiff = |i: usize| (20..40).contains(&i);
    let spring = |i: usize| if stiff(i) || stiff(i + 1) { 16.0 } else { 1.0 };
    let mut t = TripletBuilder::new(n, n);
    for i in 0..n {
        let left = if i > 0 { spring(i - 1) } else { 1.0 };
        t.push(i, i, left + spring(i));
        if i + 1 < n {
            t.push(i, i + 1, -spring(i));
            t.push(i + 1, i, -spring(i));
        }
    }
    let a = SparseSymMatrix::new(t.build())?;
    let sys = NormalizedSystem::from_parts(
        a.clone(),
        DiagOrBlock::Diag(DiagMatrix::new(vec![0.0; n])),
        None,
    )?;
    let mask = FineMask::new((0..n).map(|i| (18..42).contains(&i)).collect(), 0);
    let coarse: Vec<usize> = (0..n).filter(|&i| !mask.is_fine(i)).collect();

    let dt_global = lf_reference_step(&a)?;
    let dt = 0.6 * 2.0 * dt_global;
    let z0: Vec<f64> = (0..n)
        .map(|i| (-((i as f64 - 10.0) / 3.0).powi(2)).exp())
        .collect();

    let ls = LtsSystem::new(sys.clone(), mask)?;
    let cfg = LtsConfig::new(dt, 2, Scheme::Lf2)?;
    let mut lts = TwoStepState::new(z0.clone(), z0.clone(), 0.0)?;
    let fine_dt = dt / 8.0;
    let mut reference = TwoStepState::new(z0.clone(), z0, 0.0)?;
    for _ in 0..200 {
        lts = lts_lf2_step(&ls, &lts, &cfg)?;
        for _ in 0..8 {
            reference = leapfrog_step(&sys, &reference, fine_dt)?;
        }
    }
    let diff = coarse
        .iter()
        .map(|&i| (lts.z_n[i] - reference.z_n[i]).abs())
        .fold(0.0, f64::max);
    println!("global leap-frog limit {dt_global:.4e}, LTS step {dt:.4e} (p = 2)");
    println!(
        "after t = {:.2}: max deviation on coarse nodes {diff:.3e}",
        lts.t_n
    );
    Ok(())
}
