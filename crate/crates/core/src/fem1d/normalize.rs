use std::sync::Arc;

use super::{SemiDiscreteFirstOrder, SemiDiscreteSecondOrder};
use crate::error::{check_len, Error, Result};
use crate::numkit::{
    BlockDiagMatrix, BlockSolve, CsrMatrix, DenseMatrix, DiagMatrix, DiagOrBlock, MatVec,
    SparseSymMatrix, TripletBuilder,
};

/// Time-dependent vector, e.g. a load vector `F(t)`.
pub type Sampler = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;

/// `z'' + D z' + A z = R(t)` with `z = M^{1/2} U`.
#[derive(Clone)]
pub struct NormalizedSystem {
    pub a: SparseSymMatrix,
    pub d: DiagOrBlock,
    m_sqrt: DiagOrBlock,
    m_inv_sqrt: DiagOrBlock,
    source: Option<Sampler>,
}

impl std::fmt::Debug for NormalizedSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NormalizedSystem")
            .field("n", &self.a.n())
            .field("has_source", &self.source.is_some())
            .finish()
    }
}

impl NormalizedSystem {
    /// System with `M = I`, already in z-form.
    pub fn from_parts(a: SparseSymMatrix, d: DiagOrBlock, source: Option<Sampler>) -> Result<Self> {
        check_len(a.n(), d.dim())?;
        let n = a.n();
        Ok(Self {
            a,
            d,
            m_sqrt: DiagOrBlock::Diag(DiagMatrix::identity(n)),
            m_inv_sqrt: DiagOrBlock::Diag(DiagMatrix::identity(n)),
            source,
        })
    }

    pub fn n(&self) -> usize {
        self.a.n()
    }

    pub fn has_source(&self) -> bool {
        self.source.is_some()
    }

    /// `R(t)`, or zero without a source.
    pub fn r(&self, t: f64) -> Vec<f64> {
        match &self.source {
            Some(s) => s(t),
            None => vec![0.0; self.n()],
        }
    }

    pub fn is_damped(&self) -> bool {
        match &self.d {
            DiagOrBlock::Diag(d) => d.entries().iter().any(|&x| x != 0.0),
            DiagOrBlock::Block(b) => b.blocks().iter().any(|m| m.max_abs() != 0.0),
        }
    }

    /// `z = M^{1/2} u`
    pub fn to_z(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.m_sqrt.matvec(u)
    }

    /// `u = M^{-1/2} z`
    pub fn from_z(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.m_inv_sqrt.matvec(z)
    }

    pub fn m_inv_sqrt(&self) -> &DiagOrBlock {
        &self.m_inv_sqrt
    }
}

/// `y' = B y + G(t)` with `B = M^{-1}(-M_sigma - C)` and `G = M^{-1} F`.
#[derive(Clone)]
pub struct NormalizedFirstOrder {
    pub b: CsrMatrix,
    pub m: BlockDiagMatrix,
    source: Option<Sampler>,
}

impl std::fmt::Debug for NormalizedFirstOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NormalizedFirstOrder")
            .field("n", &self.b.rows())
            .field("has_source", &self.source.is_some())
            .finish()
    }
}

impl NormalizedFirstOrder {
    pub fn n(&self) -> usize {
        self.b.rows()
    }

    pub fn has_source(&self) -> bool {
        self.source.is_some()
    }

    /// `M^{-1} F(t)`, or zero without a source.
    pub fn g(&self, t: f64) -> Result<Vec<f64>> {
        match &self.source {
            Some(s) => self.m.block_solve(&s(t)),
            None => Ok(vec![0.0; self.n()]),
        }
    }
}

/// Conversion of a semi-discrete system to the form the integrators consume.
pub trait Normalize {
    type Output;
    fn normalize(&self, source: Option<Sampler>) -> Result<Self::Output>;
}

/// See [`Normalize`]. The source samples the physical load vector `F(t)`.
pub fn normalize<S: Normalize>(sys: &S, source: Option<Sampler>) -> Result<S::Output> {
    sys.normalize(source)
}

fn block_to_csr(b: &BlockDiagMatrix) -> CsrMatrix {
    let n = b.n();
    let mut t = TripletBuilder::new(n, n);
    for (k, m) in b.blocks().iter().enumerate() {
        let o = b.offsets()[k];
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                if m[(i, j)] != 0.0 {
                    t.push(o + i, o + j, m[(i, j)]);
                }
            }
        }
    }
    t.build()
}

fn block_powers(m: &BlockDiagMatrix) -> Result<(BlockDiagMatrix, BlockDiagMatrix)> {
    let mut sq = Vec::new();
    let mut inv = Vec::new();
    for (k, b) in m.blocks().iter().enumerate() {
        let (vals, _) = b.sym_eigen();
        if vals.first().is_none_or(|&v| !(v > 0.0)) {
            return Err(Error::Assembly(format!(
                "mass block {k} is not positive definite"
            )));
        }
        sq.push(b.sym_function(f64::sqrt));
        inv.push(b.sym_function(|x| 1.0 / x.sqrt()));
    }
    Ok((BlockDiagMatrix::new(sq)?, BlockDiagMatrix::new(inv)?))
}

impl Normalize for SemiDiscreteSecondOrder {
    type Output = NormalizedSystem;

    fn normalize(&self, source: Option<Sampler>) -> Result<NormalizedSystem> {
        let n = self.k.n();
        check_len(n, self.m.dim())?;
        check_len(n, self.m_sigma.dim())?;
        let (a, d, m_sqrt, m_inv_sqrt) = match (&self.m, &self.m_sigma) {
            (DiagOrBlock::Diag(m), DiagOrBlock::Diag(ms)) => {
                if !m.is_positive() {
                    return Err(Error::Assembly(
                        "lumped mass has a non-positive entry".into(),
                    ));
                }
                let s = m.map(|x| 1.0 / x.sqrt());
                let a = self
                    .k
                    .csr()
                    .scale_rows(s.entries())
                    .scale_columns(s.entries());
                let d: Vec<f64> = ms
                    .entries()
                    .iter()
                    .zip(m.entries())
                    .map(|(a, b)| a / b)
                    .collect();
                (
                    a,
                    DiagOrBlock::Diag(DiagMatrix::new(d)),
                    DiagOrBlock::Diag(m.map(f64::sqrt)),
                    DiagOrBlock::Diag(s),
                )
            }
            (DiagOrBlock::Block(m), DiagOrBlock::Block(ms)) => {
                if m.offsets() != ms.offsets() {
                    return Err(Error::Assembly(
                        "mass and damping blocks differ in layout".into(),
                    ));
                }
                let (sq, inv) = block_powers(m)?;
                let s = block_to_csr(&inv);
                let a = s.mul(self.k.csr()).mul(&s);
                let d_blocks: Vec<DenseMatrix> = inv
                    .blocks()
                    .iter()
                    .zip(ms.blocks())
                    .map(|(si, b)| {
                        let mut x = si.mul(b).mul(si);
                        x.symmetrize();
                        x
                    })
                    .collect();
                (
                    a,
                    DiagOrBlock::Block(BlockDiagMatrix::new(d_blocks)?),
                    DiagOrBlock::Block(sq),
                    DiagOrBlock::Block(inv),
                )
            }
            _ => return Err(Error::Assembly("mass and damping storage differ".into())),
        };
        let a = SparseSymMatrix::with_tolerance(a, 1e-12)?;
        let source = source.map(|f| {
            let s = m_inv_sqrt.clone();
            Arc::new(move |t: f64| {
                let v = f(t);
                let mut y = vec![0.0; v.len()];
                s.apply_into(&v, &mut y);
                y
            }) as Sampler
        });
        Ok(NormalizedSystem {
            a,
            d,
            m_sqrt,
            m_inv_sqrt,
            source,
        })
    }
}

impl Normalize for SemiDiscreteFirstOrder {
    type Output = NormalizedFirstOrder;

    fn normalize(&self, source: Option<Sampler>) -> Result<NormalizedFirstOrder> {
        let n = self.c.rows();
        check_len(n, self.m.n())?;
        check_len(n, self.m_sigma.n())?;
        let mut inv_blocks = Vec::with_capacity(self.m.blocks().len());
        for (k, b) in self.m.blocks().iter().enumerate() {
            inv_blocks.push(b.inverse().ok_or(Error::Singular { block: k })?);
        }
        // -(C + M_sigma), then the blockwise inverse mass from the left
        let rhs = self
            .c
            .linear_combination(-1.0, &block_to_csr(&self.m_sigma), -1.0);
        let minv = block_to_csr(&BlockDiagMatrix::new(
            inv_blocks
                .iter()
                .map(|b| {
                    let mut s = b.clone();
                    s.symmetrize();
                    s
                })
                .collect(),
        )?);
        let b = minv.mul(&rhs);
        Ok(NormalizedFirstOrder {
            b,
            m: self.m.clone(),
            source,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem1d::{assemble_cg, assemble_ipdg, BoundaryCondition, Coefficients, DofMap};

    fn scalar_sys(m: f64, k: f64) -> SemiDiscreteSecondOrder {
        SemiDiscreteSecondOrder {
            m: DiagOrBlock::Diag(DiagMatrix::new(vec![m])),
            k: SparseSymMatrix::from_diagonal(&[k]),
            m_sigma: DiagOrBlock::Diag(DiagMatrix::new(vec![0.0])),
            dof_coords: vec![0.0],
            order: 1,
            dofs: DofMap {
                order: 1,
                n_dofs: 1,
                elements: vec![],
                continuous: true,
            },
        }
    }

    #[test]
    fn scalar_scaling() {
        let z = normalize(&scalar_sys(4.0, 8.0), None).unwrap();
        assert_eq!(z.a.csr().get(0, 0), 2.0);
        let z = normalize(&scalar_sys(1.0, 8.0), None).unwrap();
        assert_eq!(z.a.csr().get(0, 0), 8.0);
        assert!(normalize(&scalar_sys(0.0, 1.0), None).is_err());
    }

    #[test]
    fn assembled_systems_are_symmetric() {
        let mesh = crate::fem1d::build_three_region_mesh(0.5, 3).unwrap();
        let coef = Coefficients::constant(&mesh, 1.0, 0.1).unwrap();
        for sys in [
            assemble_cg(&mesh, 2, &coef, BoundaryCondition::Dirichlet).unwrap(),
            assemble_ipdg(&mesh, 2, &coef, 20.0, BoundaryCondition::Dirichlet).unwrap(),
        ] {
            let z = normalize(&sys, None).unwrap();
            assert!(z.a.csr().asymmetry() < 1e-13);
            let u: Vec<f64> = (0..z.n()).map(|i| (i as f64).sin()).collect();
            let back = z.from_z(&z.to_z(&u).unwrap()).unwrap();
            assert!(crate::numkit::relative_diff(&u, &back) < 1e-12);
            // uniform damping normalizes to sigma times the identity
            let dz = z.d.matvec(&u).unwrap();
            for (a, b) in dz.iter().zip(&u) {
                assert!((a - 0.1 * b).abs() < 1e-12);
            }
        }
    }
}
