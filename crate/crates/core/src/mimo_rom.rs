//! Multi-sensor reduced order model with `m × m` block structure.

use crate::error::{Error, Result};
use crate::forward::DataSet;
use crate::gram::GramPair;
use crate::linalg::{
    cholesky_upper, inverse, polar_left, spd_inv_sqrt, spd_inverse, spd_sqrt, sym_eig, BlockMatrix, DenseMatrix,
};
use crate::siso_rom::{chebyshev_frames, xi};

/// Relative size of off-band blocks of the projected propagator that is
/// still attributed to rounding.
pub const OFFBAND_TOL: f64 = 1e-9;

/// Choice of the orthogonal factor in each diagonal block of the block
/// Cholesky factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum QPolicy {
    /// Symmetric diagonal blocks (principal square roots).
    #[default]
    Identity,
    /// Upper-triangular diagonal blocks (scalar Cholesky of each pivot).
    Triangular,
}

/// Block upper-triangular `R` with `x = RᵀR`.
pub fn block_cholesky(x: &BlockMatrix, policy: QPolicy) -> Result<BlockMatrix> {
    let (n, m) = (x.n(), x.m());
    crate::linalg::symmetrize_checked(x.dense())?;
    let mut r = BlockMatrix::zeros(n, m);
    for k in 0..n {
        let mut pivot = x.block(k, k);
        for i in 0..k {
            let rik = r.block(i, k);
            pivot = pivot.sub(&rik.t_matmul(&rik));
        }
        let pivot = pivot.symmetrized();
        let diag = match policy {
            QPolicy::Identity => spd_sqrt(&pivot),
            QPolicy::Triangular => cholesky_upper(&pivot),
        }
        .map_err(|e| match e {
            Error::NotPositiveDefinite { pivot, .. } => {
                Error::NotPositiveDefinite { context: "block_cholesky", index: k, pivot }
            }
            other => other,
        })?;
        let diag_inv_t = inverse(&diag)?.transpose();
        r.set_block(k, k, &diag);
        for j in k + 1..n {
            let mut rhs = x.block(k, j);
            for i in 0..k {
                rhs = rhs.sub(&r.block(i, k).t_matmul(&r.block(i, j)));
            }
            r.set_block(k, j, &diag_inv_t.matmul(&rhs));
        }
    }
    Ok(r)
}

/// Solves `Rᵀ y = x` for block upper-triangular `R`.
fn block_solve_upper_transpose(r: &BlockMatrix, x: &DenseMatrix) -> Result<DenseMatrix> {
    let (n, m) = (r.n(), r.m());
    let cols = x.cols();
    let mut y = DenseMatrix::zeros(n * m, cols);
    for i in 0..n {
        let mut rhs = x.submatrix(i * m, 0, m, cols);
        for j in 0..i {
            rhs = rhs.sub(&r.block(j, i).t_matmul(&y.submatrix(j * m, 0, m, cols)));
        }
        let diag_inv_t = inverse(&r.block(i, i))?.transpose();
        y.set_submatrix(i * m, 0, &diag_inv_t.matmul(&rhs));
    }
    Ok(y)
}

/// Reduced model `(P̃, b̃ = E₁ D_0^{1/2})` matching `2n` block data frames.
#[derive(Clone, Debug, PartialEq)]
pub struct MimoRom {
    pub n: usize,
    pub m: usize,
    pub tau: f64,
    pub p_tilde: BlockMatrix,
    pub d0_sqrt: DenseMatrix,
    pub d0: DenseMatrix,
    /// Largest off-band entry of `R⁻ᵀ stiff R⁻¹` before zeroing, relative to
    /// the largest entry.
    pub offband: f64,
}

impl MimoRom {
    /// `b̃ = E₁ D_0^{1/2}`.
    pub fn sensor_block(&self) -> DenseMatrix {
        let mut b = DenseMatrix::zeros(self.n * self.m, self.m);
        b.set_submatrix(0, 0, &self.d0_sqrt);
        b
    }
}

pub fn build_rom(data: &DataSet, n: usize) -> Result<MimoRom> {
    let m = data.m();
    let gram = GramPair::from_data(data, n)?;
    let r = block_cholesky(&gram.mass, QPolicy::Identity)?;
    let y = block_solve_upper_transpose(&r, gram.stiff.dense())?;
    let p = block_solve_upper_transpose(&r, &y.transpose())?.transpose().symmetrized();
    let mut p = BlockMatrix::from_dense(n, m, p);
    let offband = p.offband_relative(1);
    p.zero_offband(1);
    let rho = sym_eig(p.dense())?.values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if rho >= 1.0 {
        return Err(Error::NonContractive { spectral_radius: rho });
    }
    let d0 = data.frame(0).clone();
    Ok(MimoRom { n, m, tau: data.tau(), p_tilde: p, d0_sqrt: spd_sqrt(&d0)?, d0, offband })
}

/// `D̃_k = b̃ᵀ T_k(P̃) b̃` for `k = 0..two_n`.
pub fn rom_data(rom: &MimoRom, two_n: usize) -> Result<DataSet> {
    let frames = chebyshev_frames(rom.p_tilde.dense(), &rom.sensor_block(), two_n);
    DataSet::new(rom.tau, frames)
}

/// Block bidiagonal factor consistent with matrix coefficients `γ_j`, `γ̂_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct MimoFactor {
    pub l_tilde: BlockMatrix,
    pub gammas: Vec<DenseMatrix>,
    pub gamma_hats: Vec<DenseMatrix>,
    pub q_blocks: Vec<DenseMatrix>,
    /// `Q P̃ Qᵀ` with `Q = diag(Q_1, …, Q_n)`.
    pub p_tilde_q: BlockMatrix,
}

impl MimoFactor {
    pub fn n(&self) -> usize {
        self.gammas.len()
    }

    pub fn m(&self) -> usize {
        self.l_tilde.m()
    }

    /// Block-diagonal `Q`.
    pub fn q_matrix(&self) -> BlockMatrix {
        let mut q = BlockMatrix::zeros(self.n(), self.m());
        for (j, qj) in self.q_blocks.iter().enumerate() {
            q.set_block(j, j, qj);
        }
        q
    }
}

fn recursion_inverse(x: &DenseMatrix, index: usize) -> Result<DenseMatrix> {
    let x = x.symmetrized();
    spd_inverse(&x).map_err(|e| match e {
        Error::NotPositiveDefinite { .. } => {
            let pivot = sym_eig(&x).map(|e| e.values[0]).unwrap_or(f64::NAN);
            Error::NotPositiveDefinite { context: "gamma recursion", index, pivot }
        }
        other => other,
    })
}

/// Rotates the block propagator so that its factor has the coefficient form
/// `(L̃)_{jj} = −√(γ̂_j⁻¹)√(γ_j⁻¹)`, `(L̃)_{j+1,j} = √(γ̂_{j+1}⁻¹)√(γ_j⁻¹)`.
pub fn consistent_factor(rom: &MimoRom) -> Result<MimoFactor> {
    let (n, m) = (rom.n, rom.m);
    let xi_blocks = BlockMatrix::from_dense(n, m, xi(rom.p_tilde.dense(), rom.tau).symmetrized());
    let alpha = |j: usize| xi_blocks.block(j, j);
    // The upper off-diagonal block of ξ(P̃) is −β_{j+1}.
    let beta_next = |j: usize| xi_blocks.block(j, j + 1).scale(-1.0);

    let mut gamma_hats = vec![recursion_inverse(&rom.d0, 0)?];
    let mut sqrt_gh = vec![spd_sqrt(&gamma_hats[0])?];
    let mut q_blocks = vec![DenseMatrix::identity(m)];
    let first = sqrt_gh[0].matmul(&alpha(0)).matmul(&sqrt_gh[0]);
    let mut gammas = vec![recursion_inverse(&first, 0)?];

    for j in 0..n.saturating_sub(1) {
        let mj = gammas[j].matmul(&sqrt_gh[j]).matmul(&q_blocks[j]).matmul(&beta_next(j));
        let polar = polar_left(&mj)?;
        let s = spd_inverse(&polar.spd_part.symmetrized())?;
        let gh = s.matmul(&s).symmetrized();
        let q = polar.orth_part;
        let inner = s.matmul(&q).matmul(&alpha(j + 1)).matmul(&q.transpose()).matmul(&s);
        let inner = inner.sub(&spd_inverse(&gammas[j])?);
        gammas.push(recursion_inverse(&inner, j + 1)?);
        gamma_hats.push(gh);
        sqrt_gh.push(s);
        q_blocks.push(q);
    }

    let mut l_tilde = BlockMatrix::zeros(n, m);
    let inv_sqrt_g: Vec<DenseMatrix> = gammas.iter().map(spd_inv_sqrt).collect::<Result<_>>()?;
    let inv_sqrt_gh: Vec<DenseMatrix> = gamma_hats.iter().map(spd_inv_sqrt).collect::<Result<_>>()?;
    for j in 0..n {
        l_tilde.set_block(j, j, &inv_sqrt_gh[j].matmul(&inv_sqrt_g[j]).scale(-1.0));
        if j + 1 < n {
            l_tilde.set_block(j + 1, j, &inv_sqrt_gh[j + 1].matmul(&inv_sqrt_g[j]));
        }
    }
    let mut q = BlockMatrix::zeros(n, m);
    for (j, qj) in q_blocks.iter().enumerate() {
        q.set_block(j, j, qj);
    }
    let p_q = q.dense().matmul(rom.p_tilde.dense()).matmul(&q.dense().transpose()).symmetrized();
    Ok(MimoFactor { l_tilde, gammas, gamma_hats, q_blocks, p_tilde_q: BlockMatrix::from_dense(n, m, p_q) })
}

/// `‖Q ξ(P̃) Qᵀ − L̃L̃ᵀ‖ / ‖ξ(P̃)‖` in the max-entry norm.
pub fn factor_residual(rom: &MimoRom, factor: &MimoFactor) -> f64 {
    let x = xi(rom.p_tilde.dense(), rom.tau);
    let q = factor.q_matrix();
    let rotated = q.dense().matmul(&x).matmul(&q.dense().transpose());
    let l = factor.l_tilde.dense();
    rotated.sub(&l.matmul(&l.transpose())).max_abs() / x.max_abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::siso_rom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd_blocks(n: usize, m: usize, seed: u64) -> BlockMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DenseMatrix::from_fn(n * m, n * m, |_, _| rng.gen_range(-1.0..1.0));
        let x = a.t_matmul(&a).add(&DenseMatrix::identity(n * m).scale(0.5));
        BlockMatrix::from_dense(n, m, x.symmetrized())
    }

    #[test]
    fn identity_factors_to_identity() {
        let x = BlockMatrix::identity(4, 3);
        for policy in [QPolicy::Identity, QPolicy::Triangular] {
            let r = block_cholesky(&x, policy).unwrap();
            assert!(r.dense().sub(x.dense()).max_abs() < 1e-15);
        }
    }

    #[test]
    fn scalar_blocks_reduce_to_cholesky() {
        let x = random_spd_blocks(6, 1, 3);
        let r = block_cholesky(&x, QPolicy::Identity).unwrap();
        let c = cholesky_upper(x.dense()).unwrap();
        assert!(r.dense().sub(&c).max_abs() < 1e-13);
    }

    #[test]
    fn block_cholesky_reconstructs_for_both_policies() {
        let x = random_spd_blocks(5, 3, 11);
        for policy in [QPolicy::Identity, QPolicy::Triangular] {
            let r = block_cholesky(&x, policy).unwrap();
            let back = r.dense().t_matmul(r.dense());
            assert!(back.sub(x.dense()).max_abs() < 1e-10 * x.dense().max_abs());
            for i in 0..5 {
                for j in 0..i {
                    assert_eq!(r.block(i, j).max_abs(), 0.0);
                }
            }
            if policy == QPolicy::Identity {
                assert!(r.block(2, 2).asymmetry() < 1e-14);
            }
        }
    }

    #[test]
    fn indefinite_pivot_reports_block() {
        let mut x = BlockMatrix::identity(3, 2);
        x.set_block(1, 1, &DenseMatrix::from_rows(&[&[1.0, 0.0], &[0.0, -1.0]]));
        assert!(matches!(block_cholesky(&x, QPolicy::Identity), Err(Error::NotPositiveDefinite { index: 1, .. })));
    }

    fn toy_block_data() -> DataSet {
        let d0 = DenseMatrix::from_rows(&[&[2.0, 0.3], &[0.3, 1.5]]);
        let d1 = DenseMatrix::from_rows(&[&[0.4, 0.1], &[0.1, 0.2]]);
        DataSet::new(1.0, vec![d0, d1]).unwrap()
    }

    #[test]
    fn order_one_block_rom() {
        let data = toy_block_data();
        let rom = build_rom(&data, 1).unwrap();
        let s = spd_inv_sqrt(data.frame(0)).unwrap();
        let want = s.matmul(data.frame(1)).matmul(&s).symmetrized();
        assert!(rom.p_tilde.dense().sub(&want).max_abs() < 1e-14);
        let back = rom_data(&rom, 2).unwrap();
        assert!(back.relative_distance(&data).unwrap() < 1e-14);

        let f = consistent_factor(&rom).unwrap();
        assert!(f.gamma_hats[0].matmul(data.frame(0)).sub(&DenseMatrix::identity(2)).max_abs() < 1e-12);
        let sg = spd_sqrt(&f.gamma_hats[0]).unwrap();
        let alpha = xi(rom.p_tilde.dense(), 1.0);
        let want = inverse(&sg.matmul(&alpha).matmul(&sg)).unwrap();
        assert!(f.gammas[0].sub(&want).max_abs() < 1e-12 * want.max_abs());
        assert_eq!(f.q_blocks[0], DenseMatrix::identity(2));
    }

    #[test]
    fn scalar_data_reduces_to_siso() {
        use crate::forward::{simulate, Medium1D, Pulse, Solver};
        let medium = Medium1D::from_profile(400, 12.0, |t| if t < 4.0 { 1.0 } else { 1.6 }).unwrap();
        let pulse = Pulse::new(1.2, 0.6).unwrap().unit_dc();
        let data = simulate(&medium.into(), &pulse, 1.0, 16, Solver::Spectral).unwrap();
        let block = build_rom(&data, 8).unwrap();
        let scalar = siso_rom::build_rom(&data, 8).unwrap();
        assert!(block.p_tilde.dense().sub(&scalar.p_tilde).max_abs() < 1e-12);
        let bf = consistent_factor(&block).unwrap();
        let sf = siso_rom::factorize(&scalar).unwrap();
        for j in 0..8 {
            assert!((bf.gammas[j][(0, 0)] - sf.gammas[j]).abs() < 1e-12 * sf.gammas[j]);
            assert!((bf.gamma_hats[j][(0, 0)] - sf.gamma_hats[j]).abs() < 1e-12 * sf.gamma_hats[j]);
            assert!((bf.q_blocks[j][(0, 0)].abs() - 1.0).abs() < 1e-15);
        }
        assert!(factor_residual(&block, &bf) < 1e-9);
    }
}
