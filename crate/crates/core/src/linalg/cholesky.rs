use super::{sym_eig, symmetrize_checked, DenseMatrix};
use crate::error::{Error, Result};

/// Upper-triangular `R` with `x = RᵀR` and positive diagonal.
pub fn cholesky_upper(x: &DenseMatrix) -> Result<DenseMatrix> {
    let a = symmetrize_checked(x)?;
    let n = a.rows();
    let mut r = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let mut pivot = a[(j, j)];
        for k in 0..j {
            pivot -= r[(k, j)] * r[(k, j)];
        }
        if !(pivot > 0.0) {
            return Err(Error::NotPositiveDefinite { context: "cholesky", index: j, pivot });
        }
        let d = pivot.sqrt();
        r[(j, j)] = d;
        for i in j + 1..n {
            let mut s = a[(j, i)];
            for k in 0..j {
                s -= r[(k, j)] * r[(k, i)];
            }
            r[(j, i)] = s / d;
        }
    }
    Ok(r)
}

/// Solves `R x = b` for upper-triangular `R`; `b` may have several columns.
pub fn solve_upper(r: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let n = r.rows();
    assert_eq!(b.rows(), n, "solve_upper shape mismatch");
    let mut x = b.clone();
    for c in 0..b.cols() {
        for i in (0..n).rev() {
            let mut s = x[(i, c)];
            for k in i + 1..n {
                s -= r[(i, k)] * x[(k, c)];
            }
            x[(i, c)] = s / r[(i, i)];
        }
    }
    x
}

/// Solves `Rᵀ x = b` for upper-triangular `R`.
pub fn solve_upper_transpose(r: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let n = r.rows();
    assert_eq!(b.rows(), n, "solve_upper_transpose shape mismatch");
    let mut x = b.clone();
    for c in 0..b.cols() {
        for i in 0..n {
            let mut s = x[(i, c)];
            for k in 0..i {
                s -= r[(k, i)] * x[(k, c)];
            }
            x[(i, c)] = s / r[(i, i)];
        }
    }
    x
}

/// `R⁻ᵀ x R⁻¹` for upper-triangular `R`, computed by two triangular solves.
pub fn inverse_congruence(r: &DenseMatrix, x: &DenseMatrix) -> DenseMatrix {
    let y = solve_upper_transpose(r, x);
    solve_upper_transpose(r, &y.transpose()).transpose()
}

/// Inverse of an upper-triangular matrix (itself upper-triangular).
pub fn upper_inverse(r: &DenseMatrix) -> DenseMatrix {
    let n = r.rows();
    let mut inv = solve_upper(r, &DenseMatrix::identity(n));
    for i in 0..n {
        for j in 0..i {
            inv[(i, j)] = 0.0;
        }
    }
    inv
}

/// A symmetric matrix together with a certified positive lower bound on its
/// spectrum.
#[derive(Clone, Debug)]
pub struct SpdCertificate {
    matrix: DenseMatrix,
    min_eigenvalue_bound: f64,
}

impl SpdCertificate {
    pub fn new(x: &DenseMatrix) -> Result<Self> {
        let matrix = symmetrize_checked(x)?;
        cholesky_upper(&matrix)?;
        let eig = sym_eig(&matrix)?;
        let lambda_min = eig.values[0];
        // Eigenvalues are accurate to about eps·‖x‖ in absolute terms.
        let slack = 64.0 * f64::EPSILON * matrix.norm_inf();
        let bound = lambda_min - slack;
        if !(bound > 0.0) {
            return Err(Error::NotPositiveDefinite { context: "spd certificate", index: 0, pivot: lambda_min });
        }
        Ok(Self { matrix, min_eigenvalue_bound: bound })
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn min_eigenvalue_bound(&self) -> f64 {
        self.min_eigenvalue_bound
    }
}
