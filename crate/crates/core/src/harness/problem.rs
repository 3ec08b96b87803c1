use super::{exact_parts, Discretization, RunConfig};
use crate::error::Result;
use crate::fem1d::{
    assemble_cg, assemble_ipdg, assemble_nodal_dg, build_fine_mask, build_three_region_mesh,
    l2_error, l2_project, normalize, BoundaryCondition, Coefficients, Mesh1D,
    SemiDiscreteFirstOrder, SemiDiscreteSecondOrder,
};
use crate::integrators::{LtsSystem, MatrixOperator, ZFormOperator};

/// Assembled system in the form its integrators consume.
#[allow(clippy::large_enum_variant)]
pub enum ProblemKind {
    Second {
        sd: SemiDiscreteSecondOrder,
        lts: LtsSystem,
    },
    First {
        sd: SemiDiscreteFirstOrder,
        op: MatrixOperator,
    },
}

/// The test problem on the three-region mesh for one `(h_coarse, p, e)`.
pub struct Problem {
    pub mesh: Mesh1D,
    pub h_coarse: f64,
    pub sigma: f64,
    pub kind: ProblemKind,
}

impl Problem {
    /// Homogeneous Dirichlet problem. `p = 1` gives the uniform coarse mesh.
    pub fn build(cfg: &RunConfig, h_coarse: f64, p: usize, overlap: usize) -> Result<Self> {
        let mesh = build_three_region_mesh(h_coarse, p)?;
        let coef = Coefficients::constant(&mesh, cfg.c, cfg.sigma)?;
        let bc = BoundaryCondition::Dirichlet;
        let kind = match cfg.disc {
            Discretization::Cg | Discretization::Ipdg => {
                let sd = if cfg.disc == Discretization::Cg {
                    assemble_cg(&mesh, cfg.order, &coef, bc)?
                } else {
                    assemble_ipdg(&mesh, cfg.order, &coef, cfg.penalty, bc)?
                };
                let mask = build_fine_mask(&mesh, &sd, overlap);
                let lts = LtsSystem::new(normalize(&sd, None)?, mask)?;
                ProblemKind::Second { sd, lts }
            }
            Discretization::NodalDg => {
                let sd = assemble_nodal_dg(&mesh, cfg.order, &coef, cfg.flux, bc)?;
                let mask = build_fine_mask(&mesh, &sd, overlap);
                let op = MatrixOperator::new(normalize(&sd, None)?.b, &mask)?;
                ProblemKind::First { sd, op }
            }
        };
        Ok(Self {
            mesh,
            h_coarse,
            sigma: cfg.sigma,
            kind,
        })
    }

    pub fn n_dofs(&self) -> usize {
        match &self.kind {
            ProblemKind::Second { sd, .. } => sd.dofs.n_dofs,
            ProblemKind::First { sd, .. } => sd.v_dofs.n_dofs,
        }
    }

    pub fn lts(&self) -> Option<&LtsSystem> {
        match &self.kind {
            ProblemKind::Second { lts, .. } => Some(lts),
            ProblemKind::First { .. } => None,
        }
    }

    /// First-order operator `(z, z')` of a second-order problem.
    pub fn z_operator(&self) -> Result<Option<ZFormOperator>> {
        match &self.kind {
            ProblemKind::Second { lts, .. } => {
                Ok(Some(ZFormOperator::new(lts.system(), lts.mask())?))
            }
            ProblemKind::First { .. } => Ok(None),
        }
    }

    /// Projected exact displacement in z-form.
    pub fn exact_z(&self, t: f64) -> Result<Vec<f64>> {
        self.projected_z(t, |x, t| exact_parts(x, t, self.sigma).0)
    }

    /// Projected exact velocity in z-form.
    pub fn exact_z_rate(&self, t: f64) -> Result<Vec<f64>> {
        self.projected_z(t, |x, t| exact_parts(x, t, self.sigma).1)
    }

    fn projected_z(&self, t: f64, f: impl Fn(f64, f64) -> f64) -> Result<Vec<f64>> {
        match &self.kind {
            ProblemKind::Second { sd, lts } => {
                lts.system()
                    .to_z(&l2_project(&self.mesh, &sd.dofs, |x| f(x, t)))
            }
            ProblemKind::First { .. } => Err(crate::error::Error::SchemeMismatch(
                "z-form data requested from a first-order problem".into(),
            )),
        }
    }

    /// Exact state for a first-order integrator: `(z, z')` or `(v, w)`.
    pub fn exact_first_order(&self, t: f64) -> Result<Vec<f64>> {
        match &self.kind {
            ProblemKind::Second { .. } => Ok(ZFormOperator::stack(
                &self.exact_z(t)?,
                &self.exact_z_rate(t)?,
            )),
            ProblemKind::First { sd, .. } => {
                let mut y = l2_project(&self.mesh, &sd.v_dofs, |x| exact_parts(x, t, self.sigma).1);
                let w = l2_project(&self.mesh, &sd.w_dofs, |x| exact_parts(x, t, self.sigma).2);
                for (a, b) in y.iter_mut().zip(&w) {
                    *a += b;
                }
                Ok(y)
            }
        }
    }

    /// L2 error of the displacement recovered from `z`.
    pub fn error_z(&self, z: &[f64], t: f64) -> Result<f64> {
        match &self.kind {
            ProblemKind::Second { sd, lts } => {
                let u = lts.system().from_z(z)?;
                Ok(l2_error(&self.mesh, &sd.dofs, &u, |x| {
                    exact_parts(x, t, self.sigma).0
                }))
            }
            ProblemKind::First { .. } => Err(crate::error::Error::SchemeMismatch(
                "z-form error requested from a first-order problem".into(),
            )),
        }
    }

    /// L2 error of a first-order state: displacement for `(z, z')`,
    /// `sqrt(|v - v_h|^2 + |w - w_h|^2)` for nodal DG.
    pub fn error_first_order(&self, y: &[f64], t: f64) -> Result<f64> {
        match &self.kind {
            ProblemKind::Second { .. } => self.error_z(&y[..self.n_dofs()], t),
            ProblemKind::First { sd, .. } => {
                let ev = l2_error(&self.mesh, &sd.v_dofs, y, |x| {
                    exact_parts(x, t, self.sigma).1
                });
                let ew = l2_error(&self.mesh, &sd.w_dofs, y, |x| {
                    exact_parts(x, t, self.sigma).2
                });
                Ok(ev.hypot(ew))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrators::Scheme;

    fn cfg(disc: Discretization, order: usize) -> RunConfig {
        RunConfig {
            disc,
            order,
            scheme: Scheme::Ab(4),
            sigma: 0.1,
            ..RunConfig::default()
        }
    }

    #[test]
    fn projection_errors_are_spatially_convergent() {
        for disc in [
            Discretization::Cg,
            Discretization::Ipdg,
            Discretization::NodalDg,
        ] {
            let c = cfg(disc, 2);
            let mut errs = Vec::new();
            for &h in &[0.2, 0.1] {
                let pb = Problem::build(&c, h, 2, 0).unwrap();
                let y = pb.exact_first_order(0.37).unwrap();
                errs.push(pb.error_first_order(&y, 0.37).unwrap());
            }
            let rate = (errs[0] / errs[1]).log2();
            assert!(rate > 2.7, "{disc}: rate {rate}");
        }
    }

    #[test]
    fn uniform_reference_has_empty_mask() {
        let pb = Problem::build(&RunConfig::default(), 0.2, 1, 1).unwrap();
        assert_eq!(pb.lts().unwrap().mask().count(), 0);
        let pb = Problem::build(&RunConfig::default(), 0.2, 3, 0).unwrap();
        assert!(pb.lts().unwrap().mask().count() > 0);
    }
}
