use super::basis::LagrangeBasis;
use super::{
    check_order, element_mass, element_stiffness, map_to_element, BoundaryCondition, Coefficients,
    DofMap, Mesh1D, SemiDiscreteSecondOrder,
};
use crate::error::{Error, Result};
use crate::numkit::{
    sym_lambda_extremes, BlockDiagMatrix, DiagOrBlock, SparseSymMatrix, TripletBuilder,
    DEFAULT_EIGEN_MAX_ITER,
};

pub const DEFAULT_PENALTY: f64 = 20.0;

/// Highest order accepted by the DG assemblers.
pub(crate) const MAX_DG_ORDER: usize = 8;

/// Trace data of one element side: dofs, basis values and `c^2`-weighted
/// physical derivatives at the end point.
struct Trace {
    dofs: Vec<usize>,
    value: Vec<f64>,
    flux: Vec<f64>,
}

fn trace(basis: &LagrangeBasis, mesh: &Mesh1D, coef: &Coefficients, e: usize, xi: f64) -> Trace {
    let n = basis.len();
    let h = mesh.h(e);
    let c2 = coef.c(e) * coef.c(e);
    Trace {
        dofs: (0..n).map(|j| e * n + j).collect(),
        value: basis.values(xi),
        flux: basis
            .derivatives(xi)
            .iter()
            .map(|d| c2 * d * 2.0 / h)
            .collect(),
    }
}

/// Adds `-J G^T - G J^T + a J J^T` for jump vector `J` and average-flux
/// vector `G` given as sparse (index, value) lists.
fn add_face(kb: &mut TripletBuilder, jump: &[(usize, f64)], avg: &[(usize, f64)], a: f64) {
    for &(i, ji) in jump {
        for &(j, gj) in avg {
            kb.push(i, j, -ji * gj);
            kb.push(j, i, -ji * gj);
        }
        for &(j, jj) in jump {
            kb.push(i, j, a * ji * jj);
        }
    }
}

/// Symmetric interior-penalty DG with penalty `alpha c^2 / h` on each face.
pub fn assemble_ipdg(
    mesh: &Mesh1D,
    order: usize,
    coef: &Coefficients,
    alpha: f64,
    bc: BoundaryCondition,
) -> Result<SemiDiscreteSecondOrder> {
    check_order(order, MAX_DG_ORDER)?;
    coef.check(mesh)?;
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::input(format!(
            "penalty alpha must be positive, got {alpha}"
        )));
    }
    let basis = LagrangeBasis::gll(order);
    let nl = basis.len();
    let ne = mesh.n_elements();
    let n = ne * nl;
    let mut kb = TripletBuilder::new(n, n);
    let mut mass = Vec::with_capacity(ne);
    let mut damp = Vec::with_capacity(ne);
    let mut coords = Vec::with_capacity(n);
    let mut elements = Vec::with_capacity(ne);
    for e in 0..ne {
        let h = mesh.h(e);
        let ke = element_stiffness(&basis, h, coef.c(e));
        for i in 0..nl {
            for j in 0..nl {
                kb.push(e * nl + i, e * nl + j, ke[(i, j)]);
            }
            coords.push(map_to_element(mesh, e, basis.nodes()[i]));
        }
        let me = element_mass(&basis, h);
        damp.push(me.scaled(coef.sigma(e)));
        mass.push(me);
        elements.push((0..nl).map(|j| Some(e * nl + j)).collect());
    }

    for f in 1..ne {
        let (l, r) = (f - 1, f);
        let tl = trace(&basis, mesh, coef, l, 1.0);
        let tr = trace(&basis, mesh, coef, r, -1.0);
        let mut jump = Vec::new();
        let mut avg = Vec::new();
        for t in 0..nl {
            jump.push((tl.dofs[t], tl.value[t]));
            jump.push((tr.dofs[t], -tr.value[t]));
            avg.push((tl.dofs[t], 0.5 * tl.flux[t]));
            avg.push((tr.dofs[t], 0.5 * tr.flux[t]));
        }
        let h = mesh.h(l).min(mesh.h(r));
        let c = coef.c(l).max(coef.c(r));
        add_face(&mut kb, &jump, &avg, alpha * c * c / h);
    }
    if bc == BoundaryCondition::Dirichlet {
        for (e, xi, normal) in [(0, -1.0, -1.0), (ne - 1, 1.0, 1.0)] {
            let t = trace(&basis, mesh, coef, e, xi);
            let jump: Vec<_> = (0..nl).map(|j| (t.dofs[j], normal * t.value[j])).collect();
            let avg: Vec<_> = (0..nl).map(|j| (t.dofs[j], t.flux[j])).collect();
            let c = coef.c(e);
            add_face(&mut kb, &jump, &avg, alpha * c * c / mesh.h(e));
        }
    }

    Ok(SemiDiscreteSecondOrder {
        m: DiagOrBlock::Block(BlockDiagMatrix::new(mass)?),
        k: SparseSymMatrix::new(kb.build())?,
        m_sigma: DiagOrBlock::Block(BlockDiagMatrix::new(damp)?),
        dof_coords: coords,
        order,
        dofs: DofMap {
            order,
            n_dofs: n,
            elements,
            continuous: false,
        },
    })
}

/// Checks `lambda_min(K) >= -1e-10 lambda_max(K)`, i.e. that the penalty is
/// large enough for coercivity on this mesh.
pub fn check_coercive(sys: &SemiDiscreteSecondOrder) -> Result<()> {
    let s = sym_lambda_extremes(&sys.k, 1e-8, DEFAULT_EIGEN_MAX_ITER)?;
    if s.lambda_min < -1e-10 * s.lambda_max.abs() {
        return Err(Error::Assembly(format!(
            "stiffness matrix is indefinite (lambda_min = {:.3e}); increase the penalty",
            s.lambda_min
        )));
    }
    Ok(())
}
