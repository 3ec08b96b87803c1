//! Exact coefficients of the Adams-Bashforth and local leap-frog schemes.

use num_rational::Rational64;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Highest backward-difference index with a tabulated `gamma_j`.
pub const MAX_GAMMA_INDEX: usize = 3;

fn r(n: i64) -> Rational64 {
    Rational64::from_integer(n)
}

/// Coefficients of `gamma_tilde_j(xi) = xi (xi + 1) ... (xi + j - 1) / j!`
/// in increasing powers of `xi`.
fn gamma_tilde_poly(j: usize) -> Vec<Rational64> {
    let mut c = vec![Rational64::one()];
    for i in 0..j {
        // multiply by (xi + i) / (i + 1)
        let mut next = vec![Rational64::zero(); c.len() + 1];
        for (d, &a) in c.iter().enumerate() {
            next[d + 1] += a;
            next[d] += a * r(i as i64);
        }
        let s = r(i as i64 + 1);
        c = next.into_iter().map(|x| x / s).collect();
    }
    c
}

/// Exact coefficients of `gamma_tilde_j`, lowest power first.
pub fn gamma_tilde_polynomial(j: usize) -> Result<Vec<Rational64>> {
    check_j(j)?;
    Ok(gamma_tilde_poly(j))
}

/// Exact coefficients of `gamma_j`, lowest power first (constant term zero).
pub fn gamma_polynomial(j: usize) -> Result<Vec<Rational64>> {
    check_j(j)?;
    let mut integral = vec![Rational64::zero()];
    for (d, &a) in gamma_tilde_poly(j).iter().enumerate() {
        integral.push(a / r(d as i64 + 1));
    }
    Ok(integral)
}

fn eval_poly(c: &[Rational64], x: Rational64) -> Rational64 {
    c.iter()
        .rev()
        .fold(Rational64::zero(), |acc, &a| acc * x + a)
}

/// `gamma_tilde_j(xi) = (-1)^j binom(-xi, j)` in exact arithmetic, for any `xi`.
pub fn gamma_tilde_exact(j: usize, xi: Rational64) -> Rational64 {
    eval_poly(&gamma_tilde_poly(j), xi)
}

/// `gamma_j(xi) = int_0^xi gamma_tilde_j(s) ds` in exact arithmetic.
pub fn gamma_exact(j: usize, xi: Rational64) -> Rational64 {
    let c = gamma_tilde_poly(j);
    let mut integral = vec![Rational64::zero()];
    for (d, &a) in c.iter().enumerate() {
        integral.push(a / r(d as i64 + 1));
    }
    eval_poly(&integral, xi)
}

fn check_j(j: usize) -> Result<()> {
    if j > MAX_GAMMA_INDEX {
        return Err(Error::input(format!(
            "gamma index {j} out of range 0..={MAX_GAMMA_INDEX}"
        )));
    }
    Ok(())
}

fn poly_f64(c: &[Rational64], x: f64) -> f64 {
    c.iter()
        .rev()
        .fold(0.0, |acc, a| acc * x + a.to_f64().unwrap_or(f64::NAN))
}

/// `gamma_j(xi)` for `j <= 3`.
pub fn gamma(j: usize, xi: f64) -> Result<f64> {
    Ok(poly_f64(&gamma_polynomial(j)?, xi))
}

/// `gamma_tilde_j(xi) = d gamma_j / d xi` for `j <= 3`; any real `xi`.
pub fn gamma_tilde(j: usize, xi: f64) -> Result<f64> {
    check_j(j)?;
    Ok(poly_f64(&gamma_tilde_poly(j), xi))
}

fn binomial(n: usize, k: usize) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i as i64 + 1))
}

/// Classical `k`-step Adams-Bashforth weights `alpha_0 .. alpha_{k-1}`.
pub fn ab_alpha(k: usize) -> Result<Vec<Rational64>> {
    check_k(k)?;
    // alpha_l = (-1)^l sum_{j >= l} binom(j, l) gamma_j(1)
    Ok((0..k)
        .map(|l| {
            let mut s = Rational64::zero();
            for j in l..k {
                s += r(binomial(j, l)) * gamma_exact(j, Rational64::one());
            }
            if l % 2 == 1 {
                -s
            } else {
                s
            }
        })
        .collect())
}

fn check_k(k: usize) -> Result<()> {
    if !(2..=4).contains(&k) {
        return Err(Error::input(format!(
            "Adams-Bashforth order k must be 2, 3 or 4, got {k}"
        )));
    }
    Ok(())
}

/// `alpha_l` and `beta_{m,l}` of LTS-AB`k`(`p`).
#[derive(Clone, Debug, PartialEq)]
pub struct AbCoefficientSet {
    pub k: usize,
    pub p: usize,
    pub alpha: Vec<Rational64>,
    /// `beta[m][l]` for `m = 0..p`, `l = 0..k`.
    pub beta: Vec<Vec<Rational64>>,
}

impl AbCoefficientSet {
    pub fn alpha_f64(&self) -> Vec<f64> {
        self.alpha.iter().map(|a| a.to_f64().unwrap()).collect()
    }

    pub fn beta_f64(&self) -> Vec<Vec<f64>> {
        self.beta
            .iter()
            .map(|row| row.iter().map(|b| b.to_f64().unwrap()).collect())
            .collect()
    }
}

/// `beta_{m,l} = sum_i alpha_i sum_{j=l}^{k-1} (-1)^l binom(j,l) gamma_tilde_j((m-i)/p)`.
pub fn ab_coefficients(k: usize, p: usize) -> Result<AbCoefficientSet> {
    check_k(k)?;
    if p == 0 {
        return Err(Error::input("refinement ratio p must be at least 1"));
    }
    let alpha = ab_alpha(k)?;
    let beta = (0..p)
        .map(|m| {
            (0..k)
                .map(|l| {
                    let mut s = Rational64::zero();
                    for (i, &a) in alpha.iter().enumerate() {
                        let xi = Rational64::new(m as i64 - i as i64, p as i64);
                        let mut inner = Rational64::zero();
                        for j in l..k {
                            inner += r(binomial(j, l)) * gamma_tilde_exact(j, xi);
                        }
                        s += a * inner;
                    }
                    if l % 2 == 1 {
                        -s
                    } else {
                        s
                    }
                })
                .collect()
        })
        .collect();
    Ok(AbCoefficientSet { k, p, alpha, beta })
}

/// Integer constants `alpha_j^p`, `j = 1..p-1`, of the effective LTS-LF2(`p`) matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlphaPTable {
    pub p: usize,
    /// `alpha[j - 1]` holds `alpha_j^p`.
    pub alpha: Vec<i64>,
}

impl AlphaPTable {
    /// Rows generated by the three-term recursion with a zero row for `p = 1`:
    /// `alpha_j^{q+1} = [j = 1] q^2 + 2 alpha_j^q - alpha_j^{q-1} - alpha_{j-1}^q`.
    pub fn generate(p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::input("refinement ratio p must be at least 1"));
        }
        if p > 40 {
            return Err(Error::input("alpha_j^p tables are limited to p <= 40"));
        }
        let get = |row: &[i64], j: usize| -> i64 {
            if j == 0 {
                0
            } else {
                row.get(j - 1).copied().unwrap_or(0)
            }
        };
        let mut prev: Vec<i64> = Vec::new();
        let mut cur: Vec<i64> = Vec::new();
        for q in 1..p {
            let next: Vec<i64> = (1..=q)
                .map(|j| {
                    let lead = if j == 1 { (q * q) as i64 } else { 0 };
                    lead + 2 * get(&cur, j) - get(&prev, j) - get(&cur, j - 1)
                })
                .collect();
            prev = std::mem::replace(&mut cur, next);
        }
        Ok(Self { p, alpha: cur })
    }

    pub fn get(&self, j: usize) -> i64 {
        self.alpha[j - 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn tables_one_and_three() {
        assert!((gamma(2, 1.0).unwrap() - 5.0 / 12.0).abs() < 1e-15);
        assert!((gamma_tilde(2, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(gamma(0, 0.3).unwrap(), 0.3);
        assert_eq!(gamma_tilde(0, -7.0).unwrap(), 1.0);
        assert_eq!(gamma_exact(3, q(1, 1)), q(3, 8));
        assert_eq!(gamma_tilde_exact(3, q(1, 2)), q(1, 48) + q(1, 8) + q(1, 6));
        assert!(gamma(4, 0.5).is_err());
    }

    #[test]
    fn derivative_relation() {
        for i in 0..20 {
            let xi = -1.0 + 0.1 * i as f64;
            for j in 0..=3 {
                let h = 1e-5;
                let fd = (gamma(j, xi + h).unwrap() - gamma(j, xi - h).unwrap()) / (2.0 * h);
                assert!((fd - gamma_tilde(j, xi).unwrap()).abs() < 1e-8);
            }
        }
        assert_eq!(
            gamma_polynomial(2).unwrap(),
            vec![q(0, 1), q(0, 1), q(1, 4), q(1, 6)]
        );
    }

    #[test]
    fn table_two() {
        assert_eq!(ab_alpha(2).unwrap(), vec![q(3, 2), q(-1, 2)]);
        assert_eq!(ab_alpha(3).unwrap(), vec![q(23, 12), q(-16, 12), q(5, 12)]);
        assert_eq!(
            ab_alpha(4).unwrap(),
            vec![q(55, 24), q(-59, 24), q(37, 24), q(-9, 24)]
        );
        assert!(ab_alpha(5).is_err());
    }

    #[test]
    fn beta_p1_is_alpha() {
        for k in 2..=4 {
            let c = ab_coefficients(k, 1).unwrap();
            assert_eq!(c.beta[0], c.alpha);
        }
    }

    #[test]
    fn printed_two_level_schemes() {
        let c = ab_coefficients(3, 2).unwrap();
        assert_eq!(c.beta[0], vec![q(17, 12), q(-7, 12), q(2, 12)]);
        assert_eq!(c.beta[1], vec![q(29, 12), q(-25, 12), q(8, 12)]);
        let c = ab_coefficients(4, 2).unwrap();
        assert_eq!(
            c.beta[0],
            vec![q(297, 192), q(-187, 192), q(107, 192), q(-25, 192)]
        );
        assert_eq!(
            c.beta[1],
            vec![q(583, 192), q(-757, 192), q(485, 192), q(-119, 192)]
        );
    }

    #[test]
    fn alpha_p_rows() {
        assert!(AlphaPTable::generate(1).unwrap().alpha.is_empty());
        assert_eq!(AlphaPTable::generate(2).unwrap().alpha, vec![1]);
        assert_eq!(AlphaPTable::generate(3).unwrap().alpha, vec![6, -1]);
        assert_eq!(AlphaPTable::generate(4).unwrap().alpha, vec![20, -8, 1]);
        assert_eq!(
            AlphaPTable::generate(5).unwrap().alpha,
            vec![50, -35, 10, -1]
        );
    }

    /// Independent expansion of the substep recursion for `R = 0`:
    /// `q_m = 2z + sum_j a_{m,j} dtau^{2j} (AP)^{j-1} A z`.
    fn expanded(p: usize) -> Vec<i64> {
        let len = p + 1;
        let force = |a: &[i64]| -> Vec<i64> {
            // 2w - AP q = -2 A z - sum_j a_j (AP)^j A z
            let mut f = vec![0i64; len + 1];
            f[1] = -2;
            for j in 1..len {
                f[j + 1] -= a[j];
            }
            f
        };
        let prev = vec![0i64; len + 1];
        let f0 = force(&prev);
        // q_{1/p} = q_0 + dtau^2 / 2 * f_0
        let mut cur: Vec<i64> = vec![0; len + 1];
        cur[1] = f0[1] / 2;
        let mut prev = prev;
        for _ in 1..p {
            let f = force(&cur);
            let mut next = vec![0i64; len + 1];
            for j in 1..len {
                // dtau^2 f shifts the power of dtau by one
                next[j] = 2 * cur[j] - prev[j] + f[j];
            }
            prev = std::mem::replace(&mut cur, next);
        }
        assert_eq!(cur[1], -((p * p) as i64));
        cur[2..=p].to_vec()
    }

    #[test]
    fn recursion_matches_expansion() {
        for p in 2..=10 {
            assert_eq!(
                AlphaPTable::generate(p).unwrap().alpha,
                expanded(p),
                "p = {p}"
            );
        }
    }

    #[test]
    fn beta_rows_sum_to_one() {
        for k in 2..=4 {
            for p in 1..=8 {
                let c = ab_coefficients(k, p).unwrap();
                for row in &c.beta {
                    assert_eq!(row.iter().copied().sum::<Rational64>(), Rational64::one());
                }
            }
        }
    }
}
