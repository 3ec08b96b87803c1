//! One-dimensional meshes and the continuous Galerkin, interior-penalty DG
//! and nodal DG semi-discretizations of the damped wave equation
//!
//! ```text
//! u_tt + sigma u_t - (c^2 u_x)_x = f
//! ```
//!
//! together with the z-form normalization and the fine-region mask.

pub mod basis;
mod cg;
mod ipdg;
mod mask;
mod mesh;
mod nodal_dg;
mod normalize;
mod projection;

pub use cg::assemble_cg;
pub use ipdg::{assemble_ipdg, check_coercive, DEFAULT_PENALTY};
pub use mask::{build_fine_mask, FineMask};
pub use mesh::{
    build_three_region_mesh, build_three_region_mesh_on, select_fine_elements, Mesh1D, Region,
};
pub use nodal_dg::{assemble_nodal_dg, Flux};
pub use normalize::{normalize, Normalize, NormalizedFirstOrder, NormalizedSystem, Sampler};
pub use projection::{evaluate, l2_error, l2_error_with_points, l2_project};

use crate::error::{Error, Result};
use crate::numkit::{BlockDiagMatrix, CsrMatrix, DiagOrBlock, SparseSymMatrix};

/// Boundary condition at both ends of the domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
}

/// Piecewise-constant wave speed and damping, one value per element.
#[derive(Clone, Debug, PartialEq)]
pub struct Coefficients {
    c: Vec<f64>,
    sigma: Vec<f64>,
}

impl Coefficients {
    pub fn new(c: Vec<f64>, sigma: Vec<f64>) -> Result<Self> {
        if c.len() != sigma.len() {
            return Err(Error::input("c and sigma need one value per element"));
        }
        if c.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(Error::input("wave speed must be positive and finite"));
        }
        if sigma.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
            return Err(Error::input("damping must be non-negative and finite"));
        }
        Ok(Self { c, sigma })
    }

    pub fn constant(mesh: &Mesh1D, c: f64, sigma: f64) -> Result<Self> {
        let n = mesh.n_elements();
        Self::new(vec![c; n], vec![sigma; n])
    }

    pub fn c(&self, k: usize) -> f64 {
        self.c[k]
    }

    pub fn sigma(&self, k: usize) -> f64 {
        self.sigma[k]
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    pub(crate) fn check(&self, mesh: &Mesh1D) -> Result<()> {
        if self.len() != mesh.n_elements() {
            return Err(Error::input(format!(
                "coefficients given for {} elements, mesh has {}",
                self.len(),
                mesh.n_elements()
            )));
        }
        Ok(())
    }
}

/// Local-to-global numbering of one scalar field.
///
/// `elements[k][j]` is the global index of local node `j` of element `k`, or
/// `None` for an eliminated Dirichlet node.
#[derive(Clone, Debug, PartialEq)]
pub struct DofMap {
    pub order: usize,
    /// Length of the global vector this field lives in.
    pub n_dofs: usize,
    pub elements: Vec<Vec<Option<usize>>>,
    /// Shared nodes between neighbouring elements (continuous Galerkin).
    pub continuous: bool,
}

/// Systems whose degrees of freedom are attached to mesh elements.
pub trait DofLayout {
    fn n_dofs(&self) -> usize;
    fn dof_maps(&self) -> Vec<&DofMap>;
}

/// `M U'' + M_sigma U' + K U = F`
#[derive(Clone, Debug)]
pub struct SemiDiscreteSecondOrder {
    pub m: DiagOrBlock,
    pub k: SparseSymMatrix,
    pub m_sigma: DiagOrBlock,
    pub dof_coords: Vec<f64>,
    pub order: usize,
    pub dofs: DofMap,
}

impl DofLayout for SemiDiscreteSecondOrder {
    fn n_dofs(&self) -> usize {
        self.dofs.n_dofs
    }

    fn dof_maps(&self) -> Vec<&DofMap> {
        vec![&self.dofs]
    }
}

/// `M Q' + C Q + M_sigma Q = F` for `q = (v, w)`, `v = u_t`, `w = -u_x`.
#[derive(Clone, Debug)]
pub struct SemiDiscreteFirstOrder {
    pub m: BlockDiagMatrix,
    pub c: CsrMatrix,
    pub m_sigma: BlockDiagMatrix,
    pub dof_coords: Vec<f64>,
    pub order: usize,
    pub v_dofs: DofMap,
    pub w_dofs: DofMap,
}

impl DofLayout for SemiDiscreteFirstOrder {
    fn n_dofs(&self) -> usize {
        self.v_dofs.n_dofs
    }

    fn dof_maps(&self) -> Vec<&DofMap> {
        vec![&self.v_dofs, &self.w_dofs]
    }
}

pub(crate) fn check_order(order: usize, max: usize) -> Result<()> {
    if order == 0 || order > max {
        return Err(Error::input(format!(
            "polynomial order must be in 1..={max}, got {order}"
        )));
    }
    Ok(())
}

/// Physical coordinate of reference point `xi` in element `k`.
pub(crate) fn map_to_element(mesh: &Mesh1D, k: usize, xi: f64) -> f64 {
    let (a, b) = mesh.element(k);
    0.5 * (a + b) + 0.5 * (b - a) * xi
}

/// Consistent reference mass `int phi_i phi_j` on an element of size `h`.
pub(crate) fn element_mass(basis: &basis::LagrangeBasis, h: f64) -> crate::numkit::DenseMatrix {
    let n = basis.len();
    let q = basis::gauss_legendre(n + 1);
    let mut m = crate::numkit::DenseMatrix::zeros(n, n);
    for (&x, &w) in q.nodes.iter().zip(&q.weights) {
        let v = basis.values(x);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] += 0.5 * h * w * v[i] * v[j];
            }
        }
    }
    m.symmetrize();
    m
}

/// `int c^2 phi_i' phi_j'` on an element of size `h`.
pub(crate) fn element_stiffness(
    basis: &basis::LagrangeBasis,
    h: f64,
    c: f64,
) -> crate::numkit::DenseMatrix {
    let n = basis.len();
    let q = basis::gauss_legendre(n + 1);
    let mut m = crate::numkit::DenseMatrix::zeros(n, n);
    for (&x, &w) in q.nodes.iter().zip(&q.weights) {
        let d = basis.derivatives(x);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] += c * c * (2.0 / h) * w * d[i] * d[j];
            }
        }
    }
    m.symmetrize();
    m
}
