use super::{DenseMatrix, MatVec};
use crate::error::{check_len, Error, Result};

/// Diagonal matrix, used for lumped mass and damping.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagMatrix {
    d: Vec<f64>,
}

impl DiagMatrix {
    pub fn new(d: Vec<f64>) -> Self {
        Self { d }
    }

    pub fn identity(n: usize) -> Self {
        Self { d: vec![1.0; n] }
    }

    pub fn entries(&self) -> &[f64] {
        &self.d
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            d: self.d.iter().map(|&x| f(x)).collect(),
        }
    }

    /// Every entry strictly positive (mass-matrix requirement).
    pub fn is_positive(&self) -> bool {
        self.d.iter().all(|&x| x > 0.0)
    }

    /// Every entry non-negative (damping-matrix requirement).
    pub fn is_nonnegative(&self) -> bool {
        self.d.iter().all(|&x| x >= 0.0)
    }
}

impl MatVec for DiagMatrix {
    fn dim(&self) -> usize {
        self.d.len()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        for ((yi, xi), di) in y.iter_mut().zip(x).zip(&self.d) {
            *yi = di * xi;
        }
    }
}

/// Block-diagonal matrix of small dense blocks, used for DG mass matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockDiagMatrix {
    blocks: Vec<DenseMatrix>,
    offsets: Vec<usize>,
}

impl BlockDiagMatrix {
    pub fn new(blocks: Vec<DenseMatrix>) -> Result<Self> {
        let mut offsets = Vec::with_capacity(blocks.len() + 1);
        offsets.push(0);
        for (k, b) in blocks.iter().enumerate() {
            if !b.is_square() || b.rows() == 0 {
                return Err(Error::input(format!(
                    "block {k} is not a non-empty square matrix"
                )));
            }
            if b.asymmetry() > 1e-13 {
                return Err(Error::input(format!("block {k} is not symmetric")));
            }
            offsets.push(offsets[k] + b.rows());
        }
        Ok(Self { blocks, offsets })
    }

    pub fn blocks(&self) -> &[DenseMatrix] {
        &self.blocks
    }

    /// Start index of each block; the final entry is the global dimension.
    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn n(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn map_blocks(&self, f: impl Fn(&DenseMatrix) -> DenseMatrix) -> Self {
        Self {
            blocks: self.blocks.iter().map(f).collect(),
            offsets: self.offsets.clone(),
        }
    }
}

impl MatVec for BlockDiagMatrix {
    fn dim(&self) -> usize {
        self.n()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        for (k, b) in self.blocks.iter().enumerate() {
            let o = self.offsets[k];
            let s = b.rows();
            for i in 0..s {
                let mut acc = 0.0;
                for j in 0..s {
                    acc += b[(i, j)] * x[o + j];
                }
                y[o + i] = acc;
            }
        }
    }
}

/// Either storage of a mass-like operator.
#[derive(Clone, Debug, PartialEq)]
pub enum DiagOrBlock {
    Diag(DiagMatrix),
    Block(BlockDiagMatrix),
}

impl MatVec for DiagOrBlock {
    fn dim(&self) -> usize {
        match self {
            DiagOrBlock::Diag(d) => d.dim(),
            DiagOrBlock::Block(b) => b.dim(),
        }
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        match self {
            DiagOrBlock::Diag(d) => d.apply_into(x, y),
            DiagOrBlock::Block(b) => b.apply_into(x, y),
        }
    }
}

/// Exact solves with diagonal or block-diagonal matrices.
pub trait BlockSolve: MatVec {
    fn block_solve(&self, rhs: &[f64]) -> Result<Vec<f64>>;
}

impl BlockSolve for DiagMatrix {
    fn block_solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        check_len(self.d.len(), rhs.len())?;
        self.d
            .iter()
            .zip(rhs)
            .enumerate()
            .map(|(k, (&d, &r))| {
                if d == 0.0 || !d.is_finite() {
                    Err(Error::Singular { block: k })
                } else {
                    Ok(r / d)
                }
            })
            .collect()
    }
}

impl BlockSolve for BlockDiagMatrix {
    fn block_solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n(), rhs.len())?;
        let mut x = vec![0.0; rhs.len()];
        for (k, b) in self.blocks.iter().enumerate() {
            let o = self.offsets[k];
            let s = b.rows();
            let sol = b
                .solve(&rhs[o..o + s])
                .ok_or(Error::Singular { block: k })?;
            x[o..o + s].copy_from_slice(&sol);
        }
        Ok(x)
    }
}

impl BlockSolve for DiagOrBlock {
    fn block_solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        match self {
            DiagOrBlock::Diag(d) => d.block_solve(rhs),
            DiagOrBlock::Block(b) => b.block_solve(rhs),
        }
    }
}
