use super::DenseMatrix;

/// Square matrix of `n × n` blocks, each `m × m`, backed by a dense
/// `nm × nm` matrix. Block indices are zero-based: block `(i, j)` covers rows
/// `i·m..(i+1)·m` and columns `j·m..(j+1)·m`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockMatrix {
    n: usize,
    m: usize,
    backing: DenseMatrix,
}

impl BlockMatrix {
    pub fn zeros(n: usize, m: usize) -> Self {
        Self { n, m, backing: DenseMatrix::zeros(n * m, n * m) }
    }

    pub fn identity(n: usize, m: usize) -> Self {
        Self { n, m, backing: DenseMatrix::identity(n * m) }
    }

    /// Wraps a dense matrix; panics unless it is `nm × nm`.
    pub fn from_dense(n: usize, m: usize, backing: DenseMatrix) -> Self {
        assert_eq!(backing.rows(), n * m, "backing rows must equal n*m");
        assert_eq!(backing.cols(), n * m, "backing cols must equal n*m");
        Self { n, m, backing }
    }

    /// Number of blocks per side.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Block size.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn dense(&self) -> &DenseMatrix {
        &self.backing
    }

    pub fn into_dense(self) -> DenseMatrix {
        self.backing
    }

    pub fn block(&self, i: usize, j: usize) -> DenseMatrix {
        self.backing.submatrix(i * self.m, j * self.m, self.m, self.m)
    }

    pub fn set_block(&mut self, i: usize, j: usize, b: &DenseMatrix) {
        assert_eq!((b.rows(), b.cols()), (self.m, self.m), "block size mismatch");
        self.backing.set_submatrix(i * self.m, j * self.m, b);
    }

    pub fn transpose(&self) -> Self {
        Self { n: self.n, m: self.m, backing: self.backing.transpose() }
    }

    /// Largest absolute entry among blocks with `|i − j| > bandwidth`,
    /// relative to the largest absolute entry of the whole matrix.
    pub fn offband_relative(&self, bandwidth: usize) -> f64 {
        let total = self.backing.max_abs();
        if total == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                if i.abs_diff(j) > bandwidth {
                    worst = worst.max(self.block(i, j).max_abs());
                }
            }
        }
        worst / total
    }

    /// Zeroes every block with `|i − j| > bandwidth`.
    pub fn zero_offband(&mut self, bandwidth: usize) {
        let zero = DenseMatrix::zeros(self.m, self.m);
        for i in 0..self.n {
            for j in 0..self.n {
                if i.abs_diff(j) > bandwidth {
                    self.set_block(i, j, &zero);
                }
            }
        }
    }
}
