//! The Data-to-Born transform: measured data are mapped to a ROM factor
//! `L̃_q`, compared with the factor `L̃_{q⁰}` of a reference medium, and the
//! difference is pushed through the linearized Chebyshev recursion.

use crate::error::{Error, Result};
use crate::forward::{simulate, DataSet, Medium, Pulse, Solver};
use crate::linalg::{spd_sqrt, DenseMatrix};
use crate::{mimo_rom, siso_rom};

/// Transformed data together with the reference data and the first-order
/// correction that separates them.
#[derive(Clone, Debug)]
pub struct DtbOutput {
    pub frames: DataSet,
    pub reference: DataSet,
    pub derivative: Vec<DenseMatrix>,
    /// Largest entry of `E₁ᵀz_j` when the recursion uses `2ξ(P̃⁰)` instead of
    /// `2P̃⁰`, minus the implemented value, relative to the implemented one.
    pub xi_form_discrepancy: f64,
}

/// Derivative frames `E₁ᵀ z_j` and the discrepancy of the alternative form.
#[derive(Clone, Debug)]
pub struct ChainRule {
    pub frames: Vec<DenseMatrix>,
    pub xi_form_discrepancy: f64,
}

fn first_block(nm: usize, m: usize) -> DenseMatrix {
    DenseMatrix::from_fn(nm, m, |i, j| if i == j { 1.0 } else { 0.0 })
}

fn check_factors(l_q: &DenseMatrix, l_q0: &DenseMatrix, m: usize) -> Result<()> {
    if l_q.rows() != l_q0.rows() || l_q.cols() != l_q0.cols() || !l_q.is_square() {
        return Err(Error::ShapeMismatch(format!(
            "factors are {}x{} and {}x{}",
            l_q.rows(),
            l_q.cols(),
            l_q0.rows(),
            l_q0.cols()
        )));
    }
    if m == 0 || !l_q.rows().is_multiple_of(m) {
        return Err(Error::ShapeMismatch(format!("order {} is not a multiple of m = {m}", l_q.rows())));
    }
    Ok(())
}

fn recursion(
    p0: &DenseMatrix,
    multiplier: &DenseMatrix,
    delta: &DenseMatrix,
    tau: f64,
    two_n: usize,
    m: usize,
) -> Vec<DenseMatrix> {
    let e1 = first_block(p0.rows(), m);
    let mut out = Vec::with_capacity(two_n);
    let mut t_prev = e1.clone();
    let mut t_cur = p0.matmul(&e1);
    let mut z_prev = DenseMatrix::zeros(p0.rows(), m);
    let mut z_cur = delta.matmul(&e1).scale(-0.5 * tau * tau);
    out.push(DenseMatrix::zeros(m, m));
    if two_n > 1 {
        out.push(e1.t_matmul(&z_cur));
    }
    for _ in 2..two_n {
        let mut z_next = multiplier.matmul(&z_cur).scale(2.0);
        z_next.add_assign_scaled(&z_prev, -1.0);
        z_next.add_assign_scaled(&delta.matmul(&t_cur), -tau * tau);
        let mut t_next = p0.matmul(&t_cur).scale(2.0);
        t_next.add_assign_scaled(&t_prev, -1.0);
        out.push(e1.t_matmul(&z_next));
        z_prev = std::mem::replace(&mut z_cur, z_next);
        t_prev = std::mem::replace(&mut t_cur, t_next);
    }
    out
}

/// `E₁ᵀ d/dε T_j(I − (τ²/2)L̃^ε L̃^{εᵀ}) E₁` at `ε = 0`, for
/// `L̃^ε = L̃_{q⁰} + ε(L̃_q − L̃_{q⁰})` and `j = 0..two_n`.
pub fn chebyshev_derivative(
    l_q: &DenseMatrix,
    l_q0: &DenseMatrix,
    tau: f64,
    two_n: usize,
    m: usize,
) -> Result<ChainRule> {
    check_factors(l_q, l_q0, m)?;
    let g0 = l_q0.matmul(&l_q0.transpose());
    let delta = l_q.matmul(&l_q0.transpose()).add(&l_q0.matmul(&l_q.transpose())).sub(&g0.scale(2.0));
    let p0 = siso_rom::xi_inverse(&g0, tau);
    let frames = recursion(&p0, &p0, &delta, tau, two_n, m);
    let alternative = recursion(&p0, &g0, &delta, tau, two_n, m);
    let scale = frames.iter().fold(0.0f64, |a, f| a.max(f.max_abs()));
    let diff = frames.iter().zip(&alternative).fold(0.0f64, |a, (f, g)| a.max(f.sub(g).max_abs()));
    let xi_form_discrepancy = if scale > 0.0 { diff / scale } else { diff };
    Ok(ChainRule { frames, xi_form_discrepancy })
}

/// Central finite difference of `E₁ᵀ T_j(I − (τ²/2)L̃^ε L̃^{εᵀ}) E₁` in `ε`.
pub fn finite_difference_derivative(
    l_q: &DenseMatrix,
    l_q0: &DenseMatrix,
    tau: f64,
    two_n: usize,
    m: usize,
    step: f64,
) -> Result<Vec<DenseMatrix>> {
    check_factors(l_q, l_q0, m)?;
    let diff = l_q.sub(l_q0);
    let e1 = first_block(l_q.rows(), m);
    let eval = |eps: f64| {
        let mut l = l_q0.clone();
        l.add_assign_scaled(&diff, eps);
        let p = siso_rom::xi_inverse(&l.matmul(&l.transpose()), tau);
        siso_rom::chebyshev_frames(&p, &e1, two_n)
    };
    let plus = eval(step);
    let minus = eval(-step);
    Ok(plus.iter().zip(&minus).map(|(a, b)| a.sub(b).scale(0.5 / step)).collect())
}

/// Dense ROM factor of a data set: bidiagonal for `m = 1`, the consistent
/// block factor otherwise.
pub fn rom_factor(data: &DataSet, n: usize) -> Result<DenseMatrix> {
    if data.m() == 1 {
        let rom = siso_rom::build_rom(data, n)?;
        Ok(siso_rom::factorize(&rom)?.l_tilde.to_dense())
    } else {
        let rom = mimo_rom::build_rom(data, n)?;
        Ok(mimo_rom::consistent_factor(&rom)?.l_tilde.into_dense())
    }
}

/// Transforms `measured` using reference data `D⁰` generated by the same
/// sensors in the reference medium. The output has `2n` frames.
pub fn dtb_from_reference(measured: &DataSet, reference: &DataSet, n: usize) -> Result<DtbOutput> {
    let reference = reference.truncated(2 * n)?;
    let measured = measured.truncated(2 * n)?;
    measured.check_compatible(&reference)?;
    let m = measured.m();
    let l_q = rom_factor(&measured, n)?;
    let l_q0 = rom_factor(&reference, n)?;
    let chain = chebyshev_derivative(&l_q, &l_q0, measured.tau(), 2 * n, m)?;
    let s = spd_sqrt(reference.frame(0))?;
    let derivative: Vec<DenseMatrix> = chain.frames.iter().map(|z| s.matmul(z).matmul(&s).symmetrized()).collect();
    let frames = reference.frames().iter().zip(&derivative).map(|(d0, dz)| d0.add(dz)).collect();
    Ok(DtbOutput {
        frames: DataSet::new(measured.tau(), frames)?,
        reference,
        derivative,
        xi_form_discrepancy: chain.xi_form_discrepancy,
    })
}

/// Simulates the reference data in `reference` with the spectral solver and
/// transforms `measured`.
pub fn dtb_transform(measured: &DataSet, reference: &Medium, pulse: &Pulse, n: usize) -> Result<DtbOutput> {
    if reference.sensor_count() != measured.m() {
        return Err(Error::ShapeMismatch(format!(
            "reference medium has {} sensors, data have {}",
            reference.sensor_count(),
            measured.m()
        )));
    }
    let d0 = simulate(reference, pulse, measured.tau(), 2 * n, Solver::Spectral)?;
    dtb_from_reference(measured, &d0, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{Medium1D, Medium2D};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_bidiagonal_block(n: usize, m: usize, seed: u64) -> DenseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut l = DenseMatrix::zeros(n * m, n * m);
        for j in 0..n {
            for a in 0..m {
                for b in 0..m {
                    let d = if a == b { -1.0 } else { 0.0 } + rng.gen_range(-0.2..0.2);
                    l[(j * m + a, j * m + b)] = d;
                    if j + 1 < n {
                        l[((j + 1) * m + a, j * m + b)] = if a == b { 1.0 } else { 0.0 } + rng.gen_range(-0.2..0.2);
                    }
                }
            }
        }
        l
    }

    #[test]
    fn identical_factors_have_zero_derivative() {
        let l = random_bidiagonal_block(6, 2, 1);
        let chain = chebyshev_derivative(&l, &l, 1.0, 12, 2).unwrap();
        assert!(chain.frames.iter().all(|f| f.max_abs() == 0.0));
    }

    #[test]
    fn derivative_matches_finite_differences() {
        for (m, seed) in [(1, 2), (3, 5)] {
            let l0 = random_bidiagonal_block(8, m, seed);
            let l = l0.add(&random_bidiagonal_block(8, m, seed + 100).sub(&l0).scale(0.1));
            let chain = chebyshev_derivative(&l, &l0, 1.0, 16, m).unwrap();
            let fd = finite_difference_derivative(&l, &l0, 1.0, 16, m, 1e-6).unwrap();
            assert_eq!(chain.frames[0].max_abs(), 0.0);
            let scale = fd.iter().fold(0.0f64, |a, f| a.max(f.max_abs()));
            for (a, b) in chain.frames.iter().zip(&fd) {
                assert!(a.sub(b).max_abs() <= 1e-5 * scale, "m={m}");
            }
            assert!(chain.xi_form_discrepancy > 1e-3);
        }
    }

    #[test]
    fn mismatched_factors_are_rejected() {
        let a = DenseMatrix::identity(4);
        let b = DenseMatrix::identity(6);
        assert!(matches!(chebyshev_derivative(&a, &b, 1.0, 4, 1), Err(Error::ShapeMismatch(_))));
        assert!(matches!(chebyshev_derivative(&b, &b, 1.0, 4, 4), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn reference_data_are_a_fixed_point() {
        let pulse = Pulse::new(1.2, 0.6).unwrap().unit_dc();
        let medium = Medium1D::from_profile(300, 12.0, |t| 1.0 + 0.3 * (t > 5.0) as u8 as f64).unwrap();
        let d0 = simulate(&medium.into(), &pulse, 1.0, 16, Solver::Spectral).unwrap();
        let out = dtb_from_reference(&d0, &d0, 8).unwrap();
        assert!(out.frames.relative_distance(&d0).unwrap() < 1e-10);

        let pulse = Pulse::new(0.6, 0.3).unwrap().unit_dc();
        let medium = Medium2D::homogeneous(30, 24, 1.0, 1.0, vec![8, 14, 20]).unwrap();
        let d0 = simulate(&medium.into(), &pulse, 2.0, 12, Solver::Spectral).unwrap();
        let out = dtb_from_reference(&d0, &d0, 6).unwrap();
        assert!(out.frames.relative_distance(&d0).unwrap() < 1e-10);
        assert!(out.frames.frames().iter().all(|f| f.asymmetry() == 0.0));
    }

    #[test]
    fn sensor_count_must_match() {
        let pulse = Pulse::new(0.6, 0.3).unwrap();
        let medium: Medium = Medium2D::homogeneous(10, 10, 1.0, 1.0, vec![3, 6]).unwrap().into();
        let data = DataSet::scalar(2.0, &[1.0, 0.5]).unwrap();
        assert!(matches!(dtb_transform(&data, &medium, &pulse, 1), Err(Error::ShapeMismatch(_))));
    }
}
