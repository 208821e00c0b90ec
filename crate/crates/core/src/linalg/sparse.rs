//! Compressed sparse row storage for the fine-grid operators, and a banded
//! Cholesky factor for the 2D stencil.

use rayon::prelude::*;

use super::DenseMatrix;
use crate::error::{Error, Result};

/// Square sparse matrix in CSR layout with sorted, de-duplicated columns.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

const PARALLEL_THRESHOLD: usize = 1 << 14;

impl SparseMatrix {
    /// Builds an `n × n` matrix from `(row, col, value)` triplets; duplicate
    /// positions are summed.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(i, j, v) in triplets {
            if i >= n || j >= n {
                return Err(Error::ShapeMismatch(format!("entry ({i}, {j}) outside {n}x{n}")));
            }
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("non-finite entry at ({i}, {j})")));
            }
            rows[i].push((j, v));
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(j, _)| j);
            for (j, v) in row {
                if col_idx.len() > *row_ptr.last().unwrap() && *col_idx.last().unwrap() == j {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self { n, row_ptr, col_idx, values })
    }

    pub fn from_dense(a: &DenseMatrix) -> Result<Self> {
        let mut t = Vec::new();
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                if a[(i, j)] != 0.0 {
                    t.push((i, j, a[(i, j)]));
                }
            }
        }
        Self::from_triplets(a.rows(), &t)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map_or(0.0, |k| vals[k])
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                d[(i, j)] = v;
            }
        }
        d
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum()
            })
            .collect()
    }

    /// `self · x` for a block of column vectors (`x` is `n × k`).
    pub fn apply(&self, x: &DenseMatrix) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.n, x.cols());
        self.apply_into(x, &mut out);
        out
    }

    pub fn apply_into(&self, x: &DenseMatrix, out: &mut DenseMatrix) {
        assert_eq!(x.rows(), self.n, "sparse apply shape mismatch");
        assert_eq!((out.rows(), out.cols()), (self.n, x.cols()));
        let k = x.cols();
        if k == 0 {
            return;
        }
        let kernel = |(i, out_row): (usize, &mut [f64])| {
            out_row.fill(0.0);
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                for (o, &xv) in out_row.iter_mut().zip(x.row(j)) {
                    *o += v * xv;
                }
            }
        };
        if self.nnz() * k >= PARALLEL_THRESHOLD {
            out.as_mut_slice().par_chunks_mut(k).enumerate().for_each(kernel);
        } else {
            out.as_mut_slice().chunks_mut(k).enumerate().for_each(kernel);
        }
    }

    /// Gershgorin enclosure `[lo, hi]` of the spectrum (valid for symmetric
    /// matrices).
    pub fn gershgorin_bounds(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            let mut radius = 0.0;
            let mut centre = 0.0;
            for (&j, &v) in cols.iter().zip(vals) {
                if j == i {
                    centre = v;
                } else {
                    radius += v.abs();
                }
            }
            lo = lo.min(centre - radius);
            hi = hi.max(centre + radius);
        }
        (lo, hi)
    }

    /// Largest `|a_ij − a_ji|` relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst / scale
    }

    /// Half bandwidth: the largest `|i − j|` among stored entries.
    pub fn bandwidth(&self) -> usize {
        (0..self.n).flat_map(|i| self.row(i).0.iter().map(move |&j| i.abs_diff(j))).max().unwrap_or(0)
    }
}

/// Lower-triangular banded matrix: entry `(i, j)` is stored for
/// `i − bandwidth ≤ j ≤ i`.
#[derive(Clone, Debug, PartialEq)]
pub struct BandedLower {
    n: usize,
    bandwidth: usize,
    // Row i holds columns i-bandwidth..=i at offsets 0..=bandwidth.
    data: Vec<f64>,
}

impl BandedLower {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j > i || i - j > self.bandwidth {
            return 0.0;
        }
        self.data[i * (self.bandwidth + 1) + self.bandwidth - (i - j)]
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        let w = self.bandwidth + 1;
        self.data[i * w + self.bandwidth - (i - j)] = v;
    }

    pub fn to_dense(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let j0 = i.saturating_sub(self.bandwidth);
                (j0..=i).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    pub fn matvec_transpose(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for (i, &xi) in x.iter().enumerate().take(self.n) {
            let j0 = i.saturating_sub(self.bandwidth);
            for (j, yj) in y.iter_mut().enumerate().take(i + 1).skip(j0) {
                *yj += self.get(i, j) * xi;
            }
        }
        y
    }
}

/// Cholesky factor `L` (lower, positive diagonal) of a symmetric positive
/// definite banded sparse matrix, `a = L Lᵀ`.
pub fn banded_cholesky(a: &SparseMatrix) -> Result<BandedLower> {
    let n = a.n();
    let bw = a.bandwidth();
    let mut l = BandedLower { n, bandwidth: bw, data: vec![0.0; n * (bw + 1)] };
    for i in 0..n {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            if j <= i {
                l.set(i, j, v);
            }
        }
    }
    for j in 0..n {
        let k0 = j.saturating_sub(bw);
        let mut pivot = l.get(j, j);
        for k in k0..j {
            pivot -= l.get(j, k).powi(2);
        }
        if !(pivot > 0.0) {
            return Err(Error::NotPositiveDefinite { context: "banded cholesky", index: j, pivot });
        }
        let d = pivot.sqrt();
        l.set(j, j, d);
        for i in j + 1..(j + bw + 1).min(n) {
            let mut s = l.get(i, j);
            for k in i.saturating_sub(bw).max(k0)..j {
                s -= l.get(i, k) * l.get(j, k);
            }
            l.set(i, j, s / d);
        }
    }
    Ok(l)
}
