use crate::error::{Error, Result};

/// Region tag of an element.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Region {
    Coarse,
    Fine,
}

/// A 1-D mesh of consecutive intervals.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh1D {
    vertices: Vec<f64>,
    regions: Vec<Region>,
}

impl Mesh1D {
    /// Mesh from strictly increasing vertices with one tag per element.
    pub fn new(vertices: Vec<f64>, regions: Vec<Region>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::input("a mesh needs at least two vertices"));
        }
        if regions.len() + 1 != vertices.len() {
            return Err(Error::input("one region tag per element is required"));
        }
        if vertices.iter().any(|x| !x.is_finite()) {
            return Err(Error::input("vertex coordinates must be finite"));
        }
        if vertices.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::input("vertices must be strictly increasing"));
        }
        Ok(Self { vertices, regions })
    }

    /// Uniform mesh of `n` coarse elements on `[a, b]`.
    pub fn uniform(a: f64, b: f64, n: usize) -> Result<Self> {
        if n == 0 || !(b > a) {
            return Err(Error::input("uniform mesh needs n >= 1 and b > a"));
        }
        let h = (b - a) / n as f64;
        let mut v: Vec<f64> = (0..n).map(|i| a + i as f64 * h).collect();
        v.push(b);
        Self::new(v, vec![Region::Coarse; n])
    }

    pub fn vertices(&self) -> &[f64] {
        &self.vertices
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn n_elements(&self) -> usize {
        self.regions.len()
    }

    /// End points of element `k`.
    pub fn element(&self, k: usize) -> (f64, f64) {
        (self.vertices[k], self.vertices[k + 1])
    }

    pub fn h(&self, k: usize) -> f64 {
        self.vertices[k + 1] - self.vertices[k]
    }

    pub fn sizes(&self) -> Vec<f64> {
        (0..self.n_elements()).map(|k| self.h(k)).collect()
    }

    pub fn h_min(&self) -> f64 {
        self.sizes().into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn is_fine(&self, k: usize) -> bool {
        self.regions[k] == Region::Fine
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.vertices[0], *self.vertices.last().unwrap())
    }

    /// Replace the region tags, e.g. with [`select_fine_elements`].
    pub fn with_regions(mut self, fine: &[bool]) -> Result<Self> {
        if fine.len() != self.n_elements() {
            return Err(Error::input("one flag per element is required"));
        }
        self.regions = fine
            .iter()
            .map(|&f| if f { Region::Fine } else { Region::Coarse })
            .collect();
        Ok(self)
    }
}

/// Number of elements of size `h` that tile an interval of length `len`.
pub(crate) fn divisions(len: f64, h: f64) -> Result<usize> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::input(format!("mesh size must be positive, got {h}")));
    }
    let q = len / h;
    let n = q.round();
    if n < 1.0 || (q - n).abs() > 1e-9 * q.max(1.0) {
        return Err(Error::input(format!(
            "h_coarse = {h} does not divide {len} evenly"
        )));
    }
    Ok(n as usize)
}

/// `[0,6]` split into `[0,2]` and `[4,6]` with size `h_coarse` and `[2,4]`
/// with size `h_coarse / p`.
pub fn build_three_region_mesh(h_coarse: f64, p: usize) -> Result<Mesh1D> {
    build_three_region_mesh_on(h_coarse, p, 2.0)
}

/// Same layout on `[0, 3L]` with regions of length `len`.
pub fn build_three_region_mesh_on(h_coarse: f64, p: usize, len: f64) -> Result<Mesh1D> {
    if p == 0 {
        return Err(Error::input("refinement ratio p must be at least 1"));
    }
    let nc = divisions(len, h_coarse)?;
    let hc = len / nc as f64;
    let nf = nc * p;
    let hf = len / nf as f64;
    let mut v = Vec::with_capacity(2 * nc + nf + 1);
    v.extend((0..nc).map(|i| i as f64 * hc));
    v.extend((0..nf).map(|i| len + i as f64 * hf));
    v.extend((0..nc).map(|i| 2.0 * len + i as f64 * hc));
    v.push(3.0 * len);
    let n = v.len() - 1;
    let mesh = Mesh1D::new(v, vec![Region::Coarse; n])?;
    let fine = select_fine_elements(&mesh, hc);
    mesh.with_regions(&fine)
}

/// Element `K` is fine iff `h_K < 0.75 h_coarse`.
pub fn select_fine_elements(mesh: &Mesh1D, h_coarse: f64) -> Vec<bool> {
    (0..mesh.n_elements())
        .map(|k| mesh.h(k) < 0.75 * h_coarse)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p1_is_uniform_coarse() {
        let m = build_three_region_mesh(1.0, 1).unwrap();
        assert_eq!(m.n_elements(), 6);
        assert!(m.regions().iter().all(|&r| r == Region::Coarse));
        assert!(m.sizes().iter().all(|&h| (h - 1.0).abs() < 1e-15));
    }

    #[test]
    fn p2_counts() {
        let m = build_three_region_mesh(0.2, 2).unwrap();
        assert_eq!(m.n_elements(), 40);
        let fine: Vec<_> = (0..40).filter(|&k| m.is_fine(k)).collect();
        assert_eq!(fine.len(), 20);
        assert_eq!(fine[0], 10);
        assert!((m.h(15) - 0.1).abs() < 1e-14);
        assert!((m.h(0) - 0.2).abs() < 1e-14);
        assert!((m.domain().1 - 6.0).abs() < 1e-15);
    }

    #[test]
    fn p7_fine_size() {
        let m = build_three_region_mesh(0.2, 7).unwrap();
        assert!((m.h(10) - 0.2 / 7.0).abs() < 1e-14);
        assert_eq!(m.n_elements(), 10 + 70 + 10);
    }

    #[test]
    fn non_divisible_rejected() {
        assert!(build_three_region_mesh(0.3, 2).is_err());
        assert!(build_three_region_mesh(0.0, 2).is_err());
        assert!(build_three_region_mesh(0.2, 0).is_err());
    }

    #[test]
    fn selection_threshold() {
        let m = Mesh1D::new(vec![0.0, 0.2, 0.24, 0.4], vec![Region::Coarse; 3]).unwrap();
        assert_eq!(select_fine_elements(&m, 0.2), vec![false, true, false]);
        let u = Mesh1D::uniform(0.0, 1.0, 5).unwrap();
        assert!(select_fine_elements(&u, 0.2).iter().all(|f| !f));
    }

    #[test]
    fn invalid_vertices_rejected() {
        assert!(Mesh1D::new(vec![0.0, 0.0, 1.0], vec![Region::Coarse; 2]).is_err());
        assert!(Mesh1D::new(vec![0.0], vec![]).is_err());
    }
}
