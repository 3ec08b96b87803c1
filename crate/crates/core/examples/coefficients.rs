//! Prints the LTS-AB substep coefficients and the A_p expansion table.
//!
//! ```text
//! cargo run --example coefficients -- 4 2
//! ```

use ltswave::integrators::{ab_coefficients, AlphaPTable};
use num_rational::Rational64;
use num_traits::Zero;

fn main() -> ltswave::Result<()> {
    let args: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let k = args.first().copied().unwrap_or(3);
    let p = args.get(1).copied().unwrap_or(2);

    let set = ab_coefficients(k, p)?;
    println!("LTS-AB{k}({p})");
    let alpha: Vec<String> = set.alpha.iter().map(|a| a.to_string()).collect();
    println!("  alpha = [{}]", alpha.join(", "));
    for (m, row) in set.beta.iter().enumerate() {
        let sum = row.iter().fold(Rational64::zero(), |s, b| s + b);
        let cells: Vec<String> = row.iter().map(|b| format!("{b:>9}")).collect();
        println!("  beta[{m}] = {}   sum {sum}", cells.join(" "));
    }

    println!("\nalpha_j^p in A_p = A - p^-2 sum_j (dt/p)^(2j) alpha_j^p (AP)^j A");
    for q in 1..=6 {
        let t = AlphaPTable::generate(q)?;
        let cells: Vec<String> = t.alpha.iter().map(|a| a.to_string()).collect();
        println!("  p = {q}: {}", cells.join(", "));
    }
    Ok(())
}
