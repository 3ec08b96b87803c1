use super::basis::{gauss_lobatto, LagrangeBasis};
use super::{
    check_order, element_stiffness, map_to_element, BoundaryCondition, Coefficients, DofMap,
    Mesh1D, SemiDiscreteSecondOrder,
};
use crate::error::Result;
use crate::numkit::{DiagMatrix, DiagOrBlock, SparseSymMatrix, TripletBuilder};

/// Continuous Galerkin with Gauss-Lobatto nodes and Gauss-Lobatto mass lumping.
pub fn assemble_cg(
    mesh: &Mesh1D,
    order: usize,
    coef: &Coefficients,
    bc: BoundaryCondition,
) -> Result<SemiDiscreteSecondOrder> {
    check_order(order, 3)?;
    coef.check(mesh)?;
    let ne = mesh.n_elements();
    let n_all = ne * order + 1;
    let shift = usize::from(bc == BoundaryCondition::Dirichlet);
    let n = n_all - 2 * shift;
    let global = |g: usize| -> Option<usize> {
        if bc == BoundaryCondition::Dirichlet && (g == 0 || g == n_all - 1) {
            None
        } else {
            Some(g - shift)
        }
    };

    let basis = LagrangeBasis::gll(order);
    let gll = gauss_lobatto(order + 1);
    let mut elements = Vec::with_capacity(ne);
    let mut mass = vec![0.0; n];
    let mut damp = vec![0.0; n];
    let mut coords = vec![0.0; n];
    let mut kb = TripletBuilder::new(n, n);
    for e in 0..ne {
        let h = mesh.h(e);
        let dofs: Vec<Option<usize>> = (0..=order).map(|j| global(e * order + j)).collect();
        let ke = element_stiffness(&basis, h, coef.c(e));
        for (i, gi) in dofs.iter().enumerate() {
            let Some(gi) = *gi else { continue };
            let w = 0.5 * h * gll.weights[i];
            mass[gi] += w;
            damp[gi] += coef.sigma(e) * w;
            coords[gi] = map_to_element(mesh, e, basis.nodes()[i]);
            for (j, gj) in dofs.iter().enumerate() {
                if let Some(gj) = *gj {
                    kb.push(gi, gj, ke[(i, j)]);
                }
            }
        }
        elements.push(dofs);
    }
    Ok(SemiDiscreteSecondOrder {
        m: DiagOrBlock::Diag(DiagMatrix::new(mass)),
        k: SparseSymMatrix::new(kb.build())?,
        m_sigma: DiagOrBlock::Diag(DiagMatrix::new(damp)),
        dof_coords: coords,
        order,
        dofs: DofMap {
            order,
            n_dofs: n,
            elements,
            continuous: true,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem1d::element_mass;
    use crate::numkit::MatVec;

    fn uniform(n: usize) -> Mesh1D {
        Mesh1D::uniform(0.0, 1.0, n).unwrap()
    }

    #[test]
    fn p1_hand_assembly() {
        let m = uniform(4);
        let coef = Coefficients::constant(&m, 1.0, 0.0).unwrap();
        let s = assemble_cg(&m, 1, &coef, BoundaryCondition::Neumann).unwrap();
        let h = 0.25;
        let DiagOrBlock::Diag(mass) = &s.m else {
            panic!()
        };
        assert!((mass.entries()[0] - h / 2.0).abs() < 1e-15);
        assert!((mass.entries()[2] - h).abs() < 1e-15);
        assert!((s.k.csr().get(2, 2) - 2.0 / h).abs() < 1e-12);
        assert!((s.k.csr().get(2, 3) + 1.0 / h).abs() < 1e-12);
        let DiagOrBlock::Diag(d) = &s.m_sigma else {
            panic!()
        };
        assert!(d.entries().iter().all(|&x| x == 0.0));
        let ku = s.k.matvec(&[1.0; 5]).unwrap();
        assert!(ku.iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn lumping_matches_row_sums_p1() {
        let m = Mesh1D::new(
            vec![0.0, 0.3, 0.5, 1.2],
            vec![super::super::Region::Coarse; 3],
        )
        .unwrap();
        let coef = Coefficients::constant(&m, 1.0, 0.0).unwrap();
        let s = assemble_cg(&m, 1, &coef, BoundaryCondition::Neumann).unwrap();
        let basis = LagrangeBasis::gll(1);
        let mut rows = vec![0.0; 4];
        for e in 0..3 {
            let me = element_mass(&basis, m.h(e));
            for i in 0..2 {
                rows[e + i] += me[(i, 0)] + me[(i, 1)];
            }
        }
        let DiagOrBlock::Diag(mass) = &s.m else {
            panic!()
        };
        for (a, b) in mass.entries().iter().zip(&rows) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn dirichlet_eliminates_ends() {
        let m = uniform(3);
        let coef = Coefficients::constant(&m, 1.0, 0.0).unwrap();
        let s = assemble_cg(&m, 3, &coef, BoundaryCondition::Dirichlet).unwrap();
        assert_eq!(s.k.n(), 8);
        assert_eq!(s.dofs.elements[0][0], None);
        assert_eq!(s.dofs.elements[2][3], None);
        assert_eq!(s.dofs.elements[1][0], Some(2));
    }

    #[test]
    fn unsupported_order() {
        let m = uniform(2);
        let coef = Coefficients::constant(&m, 1.0, 0.0).unwrap();
        assert!(assemble_cg(&m, 4, &coef, BoundaryCondition::Neumann).is_err());
        assert!(assemble_cg(&m, 0, &coef, BoundaryCondition::Neumann).is_err());
    }
}
