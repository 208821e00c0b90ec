use nalgebra::DMatrix;

use super::{symmetrize_checked, DenseMatrix};
use crate::error::Result;

/// Eigendecomposition `x = Y Λ Yᵀ` of a symmetric matrix.
#[derive(Clone, Debug)]
pub struct SymEig {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, matching `values`.
    pub vectors: DenseMatrix,
}

impl SymEig {
    /// `Y f(Λ) Yᵀ`.
    pub fn reassemble(&self, f: impl Fn(f64) -> f64) -> DenseMatrix {
        let n = self.values.len();
        let fv: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        let y = &self.vectors;
        let scaled = DenseMatrix::from_fn(n, n, |i, k| y[(i, k)] * fv[k]);
        scaled.matmul(&y.transpose())
    }
}

/// Symmetric eigendecomposition (Householder tridiagonalization followed by
/// implicit QR sweeps). Deterministic for a fixed input.
pub fn sym_eig(x: &DenseMatrix) -> Result<SymEig> {
    let a = symmetrize_checked(x)?;
    let n = a.rows();
    if n == 0 {
        return Ok(SymEig { values: Vec::new(), vectors: DenseMatrix::zeros(0, 0) });
    }
    let m = DMatrix::from_row_slice(n, n, a.as_slice());
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DenseMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(SymEig { values, vectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn diagonal_input() {
        let e = sym_eig(&DenseMatrix::from_diag(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);
        for (col, row) in [(0, 1), (1, 2), (2, 0)] {
            assert!((e.vectors[(row, col)].abs() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn swap_matrix() {
        let e = sym_eig(&DenseMatrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]])).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-15 && (e.values[1] - 1.0).abs() < 1e-15);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((e.vectors[(0, 0)] + e.vectors[(1, 0)]).abs() < 1e-15);
        assert!((e.vectors[(0, 0)].abs() - s).abs() < 1e-15);
        assert!((e.vectors[(0, 1)] - e.vectors[(1, 1)]).abs() < 1e-15);
    }

    #[test]
    fn random_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 30;
        let g = DenseMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        let x = g.add(&g.transpose());
        let e = sym_eig(&x).unwrap();
        let rec = e.reassemble(|l| l);
        assert!(rec.sub(&x).norm_inf() <= 1e-11 * x.norm_inf());
        let yty = e.vectors.t_matmul(&e.vectors);
        assert!(yty.sub(&DenseMatrix::identity(n)).max_abs() <= 1e-12);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn rejects_asymmetric() {
        let x = DenseMatrix::from_rows(&[&[1.0, 2.0], &[0.0, 1.0]]);
        assert!(sym_eig(&x).is_err());
    }
}
