use nalgebra::DMatrix;

use super::{cholesky_upper, sym_eig, upper_inverse, DenseMatrix};
use crate::error::{Error, Result};

/// Principal square root of an SPD matrix.
pub fn spd_sqrt(x: &DenseMatrix) -> Result<DenseMatrix> {
    spd_power(x, "spd_sqrt", f64::sqrt)
}

/// Inverse of the principal square root of an SPD matrix.
pub fn spd_inv_sqrt(x: &DenseMatrix) -> Result<DenseMatrix> {
    spd_power(x, "spd_inv_sqrt", |l| 1.0 / l.sqrt())
}

fn spd_power(x: &DenseMatrix, context: &'static str, f: impl Fn(f64) -> f64) -> Result<DenseMatrix> {
    let eig = sym_eig(x)?;
    if let Some((index, &pivot)) = eig.values.iter().enumerate().find(|(_, &l)| !(l > 0.0)) {
        return Err(Error::NotPositiveDefinite { context, index, pivot });
    }
    Ok(eig.reassemble(f).symmetrized())
}

/// Inverse of an SPD matrix through its Cholesky factor.
pub fn spd_inverse(x: &DenseMatrix) -> Result<DenseMatrix> {
    let r = cholesky_upper(x)?;
    let rinv = upper_inverse(&r);
    Ok(rinv.matmul(&rinv.transpose()).symmetrized())
}

/// General inverse by LU with partial pivoting.
pub fn inverse(x: &DenseMatrix) -> Result<DenseMatrix> {
    if !x.is_square() {
        return Err(Error::ShapeMismatch(format!("cannot invert a {}x{} matrix", x.rows(), x.cols())));
    }
    let n = x.rows();
    let m = DMatrix::from_row_slice(n, n, x.as_slice());
    let inv = m.lu().try_inverse().ok_or(Error::Singular { smallest: 0.0, floor: 0.0 })?;
    let out = DenseMatrix::from_fn(n, n, |i, j| inv[(i, j)]);
    if !out.is_finite() {
        return Err(Error::Singular { smallest: 0.0, floor: 0.0 });
    }
    Ok(out)
}

/// `Y f(Λ) Yᵀ v` for symmetric `x = Y Λ Yᵀ`; `v` may hold several columns.
pub fn apply_spectral_fn(x: &DenseMatrix, f: impl Fn(f64) -> f64, v: &DenseMatrix) -> Result<DenseMatrix> {
    if v.rows() != x.rows() {
        return Err(Error::ShapeMismatch(format!(
            "operator is {}x{}, argument has {} rows",
            x.rows(),
            x.cols(),
            v.rows()
        )));
    }
    let eig = sym_eig(x)?;
    let mut coeffs = eig.vectors.t_matmul(v);
    for (k, &lambda) in eig.values.iter().enumerate() {
        let fl = f(lambda);
        if !fl.is_finite() {
            return Err(Error::Domain(format!("function is not finite at eigenvalue {lambda:e}")));
        }
        for c in coeffs.row_mut(k) {
            *c *= fl;
        }
    }
    Ok(eig.vectors.matmul(&coeffs))
}

/// Left polar decomposition `mat = spd_part · orth_part`.
#[derive(Clone, Debug)]
pub struct Polar {
    pub spd_part: DenseMatrix,
    pub orth_part: DenseMatrix,
}

/// Left polar decomposition with the default singular-value floor
/// `1e-10 · σ_max(mat)`.
pub fn polar_left(mat: &DenseMatrix) -> Result<Polar> {
    polar_left_with_floor(mat, 1e-10)
}

/// Left polar decomposition; fails with [`Error::Singular`] when the smallest
/// singular value drops below `relative_floor · σ_max(mat)`.
///
/// The orthogonal factor comes from the scaled Newton iteration
/// `X ← (ζX + X^{-T}/ζ)/2`, which converges quadratically and keeps the
/// orthogonality defect at rounding level.
pub fn polar_left_with_floor(mat: &DenseMatrix, relative_floor: f64) -> Result<Polar> {
    if !mat.is_square() {
        return Err(Error::ShapeMismatch(format!(
            "polar decomposition needs a square matrix, got {}x{}",
            mat.rows(),
            mat.cols()
        )));
    }
    let n = mat.rows();
    let gram = mat.t_matmul(mat).symmetrized();
    let eig = sym_eig(&gram)?;
    let smallest = eig.values[0].max(0.0).sqrt();
    let largest = eig.values[n - 1].max(0.0).sqrt();
    let floor = relative_floor * largest;
    if !(smallest > floor) || largest == 0.0 {
        return Err(Error::Singular { smallest, floor });
    }

    let mut x = mat.clone();
    let mut scaling = true;
    let mut converged = false;
    for _ in 0..100 {
        let inv_t = inverse(&x)?.transpose();
        let zeta = if scaling { (inv_t.norm_fro() / x.norm_fro()).sqrt() } else { 1.0 };
        let next = x.scale(0.5 * zeta).add(&inv_t.scale(0.5 / zeta));
        let change = next.sub(&x).norm_fro() / next.norm_fro();
        x = next;
        if change < 1e-2 {
            scaling = false;
        }
        if change < 1e-15 * (n as f64).sqrt() * 4.0 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence("polar decomposition"));
    }
    let spd_part = mat.matmul(&x.transpose()).symmetrized();
    Ok(Polar { spd_part, orth_part: x })
}
