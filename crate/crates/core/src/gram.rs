//! Mass (`PᵀP`) and stiffness (`Pᵀ𝒫P`) matrices assembled directly from the
//! data frames through the Chebyshev product identity
//! `T_i T_j = ½(T_{i+j} + T_{|i−j|})`.

use crate::error::{Error, Result};
use crate::forward::DataSet;
use crate::linalg::BlockMatrix;

/// Mass and stiffness matrices of order `n` with `m × m` blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct GramPair {
    pub mass: BlockMatrix,
    pub stiff: BlockMatrix,
    pub n: usize,
    pub m: usize,
}

impl GramPair {
    pub fn from_data(data: &DataSet, n: usize) -> Result<Self> {
        Ok(Self { mass: mass_from_data(data, n)?, stiff: stiff_from_data(data, n)?, n, m: data.m() })
    }
}

fn check_frames(data: &DataSet, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("ROM order must be positive".into()));
    }
    if data.two_n() < 2 * n {
        return Err(Error::InsufficientFrames { required: 2 * n, available: data.two_n() });
    }
    Ok(())
}

/// Block `(i, j)` (zero-based) is `½(D_{i+j} + D_{|i−j|})`.
pub fn mass_from_data(data: &DataSet, n: usize) -> Result<BlockMatrix> {
    check_frames(data, n)?;
    let d = data.frames();
    let mut out = BlockMatrix::zeros(n, data.m());
    for i in 0..n {
        for j in 0..n {
            let block = d[i + j].add(&d[i.abs_diff(j)]).scale(0.5);
            out.set_block(i, j, &block);
        }
    }
    Ok(out)
}

/// Block `(i, j)` (zero-based) is
/// `¼(D_{i+j+1} + D_{|j−i+1|} + D_{|j−i−1|} + D_{|i+j−1|})`.
pub fn stiff_from_data(data: &DataSet, n: usize) -> Result<BlockMatrix> {
    check_frames(data, n)?;
    let d = data.frames();
    let idx = |v: isize| v.unsigned_abs();
    let mut out = BlockMatrix::zeros(n, data.m());
    for i in 0..n {
        for j in 0..n {
            let (ii, jj) = (i as isize, j as isize);
            let outer = d[idx(ii + jj + 1)].add(&d[idx(ii + jj - 1)]);
            let inner = d[idx(jj - ii + 1)].add(&d[idx(jj - ii - 1)]);
            let block = outer.add(&inner).scale(0.25);
            out.set_block(i, j, &block);
        }
    }
    Ok(out)
}
