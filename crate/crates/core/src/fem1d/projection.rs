use super::basis::{gauss_legendre, LagrangeBasis};
use super::{map_to_element, DofMap, Mesh1D};
use crate::numkit::{axpy, dot, norm2};

const CG_TOL: f64 = 1e-15;

/// L2 projection of `f` onto the space numbered by `map`.
///
/// Discontinuous spaces are projected element by element. Continuous
/// spaces solve the consistent global mass system by conjugate gradients.
/// Entries of the returned vector outside `map` are zero.
pub fn l2_project(mesh: &Mesh1D, map: &DofMap, f: impl Fn(f64) -> f64) -> Vec<f64> {
    let basis = LagrangeBasis::gll(map.order);
    let nl = basis.len();
    let q = gauss_legendre(map.order + 3);
    let vals: Vec<Vec<f64>> = q.nodes.iter().map(|&x| basis.values(x)).collect();
    let mut out = vec![0.0; map.n_dofs];
    let mut rhs = vec![0.0; map.n_dofs];
    let mut local_mass = Vec::with_capacity(mesh.n_elements());
    for (k, dofs) in map.elements.iter().enumerate() {
        let h = mesh.h(k);
        let mut me = crate::numkit::DenseMatrix::zeros(nl, nl);
        let mut be = vec![0.0; nl];
        for (qi, (&x, &w)) in q.nodes.iter().zip(&q.weights).enumerate() {
            let fx = f(map_to_element(mesh, k, x));
            let v = &vals[qi];
            for i in 0..nl {
                be[i] += 0.5 * h * w * fx * v[i];
                for j in 0..nl {
                    me[(i, j)] += 0.5 * h * w * v[i] * v[j];
                }
            }
        }
        if map.continuous {
            for (i, d) in dofs.iter().enumerate() {
                if let Some(d) = d {
                    rhs[*d] += be[i];
                }
            }
        } else {
            let x = me.solve(&be).expect("element mass is positive definite");
            for (i, d) in dofs.iter().enumerate() {
                if let Some(d) = d {
                    out[*d] = x[i];
                }
            }
        }
        local_mass.push(me);
    }
    if !map.continuous {
        return out;
    }

    let apply = |x: &[f64], y: &mut [f64]| {
        y.iter_mut().for_each(|v| *v = 0.0);
        for (k, dofs) in map.elements.iter().enumerate() {
            let me = &local_mass[k];
            for (i, di) in dofs.iter().enumerate() {
                let Some(di) = di else { continue };
                for (j, dj) in dofs.iter().enumerate() {
                    if let Some(dj) = dj {
                        y[*di] += me[(i, j)] * x[*dj];
                    }
                }
            }
        }
    };
    conjugate_gradient(apply, &rhs, &mut out);
    out
}

/// Unpreconditioned conjugate gradients for a well-conditioned SPD operator.
fn conjugate_gradient(apply: impl Fn(&[f64], &mut [f64]), b: &[f64], x: &mut [f64]) {
    let n = b.len();
    let bn = norm2(b);
    if bn == 0.0 {
        return;
    }
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    for _ in 0..(10 * n).max(100) {
        apply(&p, &mut ap);
        let alpha = rr / dot(&p, &ap);
        axpy(alpha, &p, x);
        axpy(-alpha, &ap, &mut r);
        let rr_new = dot(&r, &r);
        if rr_new.sqrt() <= CG_TOL * bn {
            break;
        }
        let beta = rr_new / rr;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
        rr = rr_new;
    }
}

/// Value at `x` of the finite element function with coefficients `coeffs`.
pub fn evaluate(mesh: &Mesh1D, map: &DofMap, coeffs: &[f64], x: f64) -> f64 {
    let v = mesh.vertices();
    let k = match v.binary_search_by(|a| a.total_cmp(&x)) {
        Ok(i) => i.min(mesh.n_elements() - 1),
        Err(i) => i.saturating_sub(1).min(mesh.n_elements() - 1),
    };
    let (a, b) = mesh.element(k);
    let xi = (2.0 * x - a - b) / (b - a);
    let basis = LagrangeBasis::gll(map.order);
    basis
        .values(xi)
        .iter()
        .zip(&map.elements[k])
        .map(|(phi, d)| d.map_or(0.0, |d| phi * coeffs[d]))
        .sum()
}

/// `|| u_h - f ||_{L2}` with `order + 3` Gauss points per element.
pub fn l2_error(mesh: &Mesh1D, map: &DofMap, coeffs: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    l2_error_with_points(mesh, map, coeffs, f, map.order + 3)
}

pub fn l2_error_with_points(
    mesh: &Mesh1D,
    map: &DofMap,
    coeffs: &[f64],
    f: impl Fn(f64) -> f64,
    points: usize,
) -> f64 {
    let basis = LagrangeBasis::gll(map.order);
    let q = gauss_legendre(points);
    let vals: Vec<Vec<f64>> = q.nodes.iter().map(|&x| basis.values(x)).collect();
    let mut s = 0.0;
    for (k, dofs) in map.elements.iter().enumerate() {
        let h = mesh.h(k);
        for (qi, (&x, &w)) in q.nodes.iter().zip(&q.weights).enumerate() {
            let uh: f64 = vals[qi]
                .iter()
                .zip(dofs)
                .map(|(phi, d)| d.map_or(0.0, |d| phi * coeffs[d]))
                .sum();
            let e = uh - f(map_to_element(mesh, k, x));
            s += 0.5 * h * w * e * e;
        }
    }
    s.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem1d::{
        assemble_cg, assemble_ipdg, build_three_region_mesh, BoundaryCondition, Coefficients,
    };

    #[test]
    fn constants_and_polynomials_reproduced() {
        let mesh = build_three_region_mesh(0.5, 3).unwrap();
        let coef = Coefficients::constant(&mesh, 1.0, 0.0).unwrap();
        for order in 1..=3 {
            let cg = assemble_cg(&mesh, order, &coef, BoundaryCondition::Neumann).unwrap();
            let dg = assemble_ipdg(&mesh, order, &coef, 20.0, BoundaryCondition::Neumann).unwrap();
            for map in [&cg.dofs, &dg.dofs] {
                let ones = l2_project(&mesh, map, |_| 1.0);
                assert!(ones.iter().all(|v| (v - 1.0).abs() < 1e-12));
                let poly = |x: f64| 0.3 - x + 0.2 * x.powi(order as i32);
                let u = l2_project(&mesh, map, poly);
                let coords = if map.continuous {
                    &cg.dof_coords
                } else {
                    &dg.dof_coords
                };
                for (ui, &x) in u.iter().zip(coords) {
                    assert!((ui - poly(x)).abs() < 1e-12, "order {order}");
                }
                assert!(l2_error(&mesh, map, &u, poly) < 1e-12);
            }
        }
    }

    #[test]
    fn evaluate_interpolates() {
        let mesh = crate::fem1d::Mesh1D::uniform(0.0, 1.0, 3).unwrap();
        let coef = Coefficients::constant(&mesh, 1.0, 0.0).unwrap();
        let cg = assemble_cg(&mesh, 2, &coef, BoundaryCondition::Neumann).unwrap();
        let u = l2_project(&mesh, &cg.dofs, |x| x * x);
        for x in [0.0, 0.1, 0.5, 0.77, 1.0] {
            assert!((evaluate(&mesh, &cg.dofs, &u, x) - x * x).abs() < 1e-12);
        }
    }
}
