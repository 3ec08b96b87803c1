use super::{DofLayout, Mesh1D};

/// Diagonal 0/1 projection onto the locally time-stepped unknowns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FineMask {
    flags: Vec<bool>,
    overlap: usize,
}

impl FineMask {
    pub fn new(flags: Vec<bool>, overlap: usize) -> Self {
        Self { flags, overlap }
    }

    pub fn all(n: usize) -> Self {
        Self::new(vec![true; n], 0)
    }

    pub fn none(n: usize) -> Self {
        Self::new(vec![false; n], 0)
    }

    pub fn flags(&self) -> &[bool] {
        &self.flags
    }

    pub fn overlap(&self) -> usize {
        self.overlap
    }

    pub fn len(&self) -> usize {
        self.flags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flags.is_empty()
    }

    pub fn count(&self) -> usize {
        self.flags.iter().filter(|&&f| f).count()
    }

    pub fn is_fine(&self, i: usize) -> bool {
        self.flags[i]
    }

    /// Diagonal of `P` as 0.0 / 1.0.
    pub fn diagonal(&self) -> Vec<f64> {
        self.flags.iter().map(|&f| f64::from(u8::from(f))).collect()
    }
}

/// Flags every dof supported on a fine element or on one of the `e` coarse
/// elements next to the fine region on either side.
pub fn build_fine_mask(mesh: &Mesh1D, sys: &impl DofLayout, e: usize) -> FineMask {
    let ne = mesh.n_elements();
    let mut marked: Vec<bool> = (0..ne).map(|k| mesh.is_fine(k)).collect();
    for _ in 0..e {
        let prev = marked.clone();
        for k in 0..ne {
            if !prev[k] && ((k > 0 && prev[k - 1]) || (k + 1 < ne && prev[k + 1])) {
                marked[k] = true;
            }
        }
    }
    let mut flags = vec![false; sys.n_dofs()];
    for map in sys.dof_maps() {
        for (k, dofs) in map.elements.iter().enumerate() {
            if marked[k] {
                for d in dofs.iter().flatten() {
                    flags[*d] = true;
                }
            }
        }
    }
    FineMask::new(flags, e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem1d::{assemble_cg, build_three_region_mesh, BoundaryCondition, Coefficients};

    fn cg(h: f64, p: usize) -> (Mesh1D, crate::fem1d::SemiDiscreteSecondOrder) {
        let m = build_three_region_mesh(h, p).unwrap();
        let c = Coefficients::constant(&m, 1.0, 0.0).unwrap();
        let s = assemble_cg(&m, 1, &c, BoundaryCondition::Neumann).unwrap();
        (m, s)
    }

    #[test]
    fn p1_mesh_has_empty_mask() {
        let (m, s) = cg(0.5, 1);
        assert_eq!(build_fine_mask(&m, &s, 0).count(), 0);
    }

    #[test]
    fn fine_region_inclusive_of_endpoints() {
        let (m, s) = cg(0.2, 2);
        let mask = build_fine_mask(&m, &s, 0);
        for (i, &x) in s.dof_coords.iter().enumerate() {
            let inside = x > 2.0 - 1e-12 && x < 4.0 + 1e-12;
            assert_eq!(mask.is_fine(i), inside, "x = {x}");
        }
        let wide = build_fine_mask(&m, &s, 1);
        for (i, &x) in s.dof_coords.iter().enumerate() {
            let inside = x > 1.8 - 1e-12 && x < 4.2 + 1e-12;
            assert_eq!(wide.is_fine(i), inside, "x = {x}");
        }
        assert_eq!(wide.count(), mask.count() + 2);
    }
}
