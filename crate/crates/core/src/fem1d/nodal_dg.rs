use super::basis::{gauss_legendre, LagrangeBasis};
use super::ipdg::MAX_DG_ORDER;
use super::{
    check_order, element_mass, map_to_element, BoundaryCondition, Coefficients, DofMap, Mesh1D,
    SemiDiscreteFirstOrder,
};
use crate::error::{Error, Result};
use crate::numkit::{BlockDiagMatrix, DenseMatrix, TripletBuilder};

/// Numerical flux for the first-order system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Flux {
    /// Averages plus jump dissipation `c/2 (q^- - q^+)`.
    Upwind,
    /// Plain averages.
    Central,
}

/// `S_ij = int phi_i phi_j'` (independent of the element size).
fn element_derivative(basis: &LagrangeBasis) -> DenseMatrix {
    let n = basis.len();
    let q = gauss_legendre(n + 1);
    let mut s = DenseMatrix::zeros(n, n);
    for (&x, &w) in q.nodes.iter().zip(&q.weights) {
        let v = basis.values(x);
        let d = basis.derivatives(x);
        for i in 0..n {
            for j in 0..n {
                s[(i, j)] += w * v[i] * d[j];
            }
        }
    }
    s
}

/// Nodal DG in strong form for `v_t + sigma v + (c^2 w)_x = f`, `w_t + v_x = 0`.
///
/// Each element stores its `v` nodes followed by its `w` nodes. Dirichlet
/// data `v = 0` is imposed through the mirror state `(-v, w)`.
pub fn assemble_nodal_dg(
    mesh: &Mesh1D,
    order: usize,
    coef: &Coefficients,
    flux: Flux,
    bc: BoundaryCondition,
) -> Result<SemiDiscreteFirstOrder> {
    check_order(order, MAX_DG_ORDER)?;
    coef.check(mesh)?;
    if bc != BoundaryCondition::Dirichlet {
        return Err(Error::Unsupported(
            "nodal DG is implemented for Dirichlet boundaries only".into(),
        ));
    }
    let basis = LagrangeBasis::gll(order);
    let nl = basis.len();
    let ne = mesh.n_elements();
    let n = 2 * nl * ne;
    let vdof = |e: usize, j: usize| 2 * nl * e + j;
    let wdof = |e: usize, j: usize| 2 * nl * e + nl + j;
    let s = element_derivative(&basis);
    // GLL nodes put every trace on a single end node
    let (first, last) = (0, nl - 1);

    let mut cb = TripletBuilder::new(n, n);
    let mut mass = Vec::with_capacity(ne);
    let mut damp = Vec::with_capacity(ne);
    let mut coords = vec![0.0; n];
    let mut vmap = Vec::with_capacity(ne);
    let mut wmap = Vec::with_capacity(ne);
    for e in 0..ne {
        let c2 = coef.c(e) * coef.c(e);
        for i in 0..nl {
            for j in 0..nl {
                cb.push(vdof(e, i), wdof(e, j), c2 * s[(i, j)]);
                cb.push(wdof(e, i), vdof(e, j), s[(i, j)]);
            }
            let x = map_to_element(mesh, e, basis.nodes()[i]);
            coords[vdof(e, i)] = x;
            coords[wdof(e, i)] = x;
        }
        let me = element_mass(&basis, mesh.h(e));
        let mut mb = DenseMatrix::zeros(2 * nl, 2 * nl);
        let mut sb = DenseMatrix::zeros(2 * nl, 2 * nl);
        for i in 0..nl {
            for j in 0..nl {
                mb[(i, j)] = me[(i, j)];
                mb[(nl + i, nl + j)] = me[(i, j)];
                sb[(i, j)] = coef.sigma(e) * me[(i, j)];
            }
        }
        mass.push(mb);
        damp.push(sb);
        vmap.push((0..nl).map(|j| Some(vdof(e, j))).collect());
        wmap.push((0..nl).map(|j| Some(wdof(e, j))).collect());
    }

    let tau = |c: f64| match flux {
        Flux::Upwind => 0.5 * c,
        Flux::Central => 0.0,
    };
    for f in 1..ne {
        let (l, r) = (f - 1, f);
        let t = tau(coef.c(l).max(coef.c(r)));
        let (cl2, cr2) = (coef.c(l).powi(2), coef.c(r).powi(2));
        // (own element, own end node, neighbour, neighbour end node, normal)
        for (me_, mi, nb, ni, nrm, c_own, c_nb) in [
            (l, last, r, first, 1.0, cl2, cr2),
            (r, first, l, last, -1.0, cr2, cl2),
        ] {
            let (vi, wi) = (vdof(me_, mi), wdof(me_, mi));
            let (vo, wo) = (vdof(nb, ni), wdof(nb, ni));
            // v row: n (c+^2 w+ - c-^2 w-) / 2 + tau (v- - v+)
            cb.push(vi, wo, 0.5 * nrm * c_nb);
            cb.push(vi, wi, -0.5 * nrm * c_own);
            cb.push(vi, vi, t);
            cb.push(vi, vo, -t);
            // w row: n (v+ - v-) / 2 + tau (w- - w+)
            cb.push(wi, vo, 0.5 * nrm);
            cb.push(wi, vi, -0.5 * nrm);
            cb.push(wi, wi, t);
            cb.push(wi, wo, -t);
        }
    }
    for (e, node, nrm) in [(0, first, -1.0), (ne - 1, last, 1.0)] {
        let t = tau(coef.c(e));
        let (vi, wi) = (vdof(e, node), wdof(e, node));
        cb.push(vi, vi, 2.0 * t);
        cb.push(wi, vi, -nrm);
    }

    let n_dofs = n;
    Ok(SemiDiscreteFirstOrder {
        m: BlockDiagMatrix::new(mass)?,
        c: cb.build(),
        m_sigma: BlockDiagMatrix::new(damp)?,
        dof_coords: coords,
        order,
        v_dofs: DofMap {
            order,
            n_dofs,
            elements: vmap,
            continuous: false,
        },
        w_dofs: DofMap {
            order,
            n_dofs,
            elements: wmap,
            continuous: false,
        },
    })
}
