//! Quadrature rules and nodal Lagrange bases on the reference interval `[-1, 1]`.

use std::f64::consts::PI;

/// Quadrature nodes and weights on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct Quadrature {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = if (1.0 - x * x).abs() < 1e-300 {
        0.5 * nf * (nf + 1.0) * x.powi(n as i32 + 1)
    } else {
        nf * (x * p1 - p0) / (x * x - 1.0)
    };
    (p1, dp)
}

/// Gauss-Legendre rule with `n` points, exact for degree `2n - 1`.
pub fn gauss_legendre(n: usize) -> Quadrature {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = -(PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    Quadrature { nodes, weights }
}

/// Gauss-Lobatto-Legendre rule with `n >= 2` points, exact for degree `2n - 3`.
pub fn gauss_lobatto(n: usize) -> Quadrature {
    assert!(n >= 2);
    let m = n - 1;
    let mut nodes = vec![0.0; n];
    for (i, node) in nodes.iter_mut().enumerate() {
        let mut x = -(PI * i as f64 / m as f64).cos();
        for _ in 0..100 {
            let (pm, _) = legendre(m, x);
            let (pm1, _) = legendre(m - 1, x);
            let dx = (x * pm - pm1) / (n as f64 * pm);
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        *node = x;
    }
    nodes[0] = -1.0;
    nodes[m] = 1.0;
    let weights = nodes
        .iter()
        .map(|&x| {
            let (pm, _) = legendre(m, x);
            2.0 / ((m * n) as f64 * pm * pm)
        })
        .collect();
    Quadrature { nodes, weights }
}

/// Lagrange basis through a fixed set of reference nodes.
#[derive(Clone, Debug)]
pub struct LagrangeBasis {
    nodes: Vec<f64>,
}

impl LagrangeBasis {
    /// Basis of degree `order` on the Gauss-Lobatto points.
    pub fn gll(order: usize) -> Self {
        Self {
            nodes: gauss_lobatto(order + 1).nodes,
        }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Values of every basis function at `x`.
    pub fn values(&self, x: f64) -> Vec<f64> {
        let n = &self.nodes;
        (0..n.len())
            .map(|i| {
                let mut v = 1.0;
                for (j, &xj) in n.iter().enumerate() {
                    if j != i {
                        v *= (x - xj) / (n[i] - xj);
                    }
                }
                v
            })
            .collect()
    }

    /// Reference derivatives of every basis function at `x`.
    pub fn derivatives(&self, x: f64) -> Vec<f64> {
        let n = &self.nodes;
        (0..n.len())
            .map(|i| {
                let mut s = 0.0;
                for (k, &xk) in n.iter().enumerate() {
                    if k == i {
                        continue;
                    }
                    let mut t = 1.0 / (n[i] - xk);
                    for (j, &xj) in n.iter().enumerate() {
                        if j != i && j != k {
                            t *= (x - xj) / (n[i] - xj);
                        }
                    }
                    s += t;
                }
                s
            })
            .collect()
    }
}
