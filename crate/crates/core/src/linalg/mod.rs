//! Dense symmetric and SPD kernels, plus the sparse operator and Chebyshev
//! machinery used by the fine-grid simulators.

mod block;
pub mod chebyshev;
mod cholesky;
mod dense;
mod eig;
mod functions;
pub mod sparse;

pub use block::BlockMatrix;
pub use cholesky::{
    cholesky_upper, inverse_congruence, solve_upper, solve_upper_transpose, upper_inverse, SpdCertificate,
};
pub use dense::DenseMatrix;
pub use eig::{sym_eig, SymEig};
pub use functions::{
    apply_spectral_fn, inverse, polar_left, polar_left_with_floor, spd_inv_sqrt, spd_inverse, spd_sqrt, Polar,
};

/// Relative `∞`-norm asymmetry accepted before a matrix is symmetrized.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Checks symmetry against [`SYMMETRY_TOL`] and returns `(x + xᵀ)/2`.
pub fn symmetrize_checked(x: &DenseMatrix) -> crate::Result<DenseMatrix> {
    symmetrize_with_tol(x, SYMMETRY_TOL)
}

pub(crate) fn symmetrize_with_tol(x: &DenseMatrix, tol: f64) -> crate::Result<DenseMatrix> {
    if !x.is_square() {
        return Err(crate::Error::ShapeMismatch(format!("expected a square matrix, got {}x{}", x.rows(), x.cols())));
    }
    let asymmetry = x.asymmetry();
    if asymmetry > tol || !asymmetry.is_finite() {
        return Err(crate::Error::NonSymmetric { asymmetry });
    }
    Ok(x.symmetrized())
}
