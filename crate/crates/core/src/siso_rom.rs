//! Single-sensor reduced order model: the projected tridiagonal propagator,
//! its bidiagonal factor and the coefficients `γ_j`, `γ̂_j`.

use crate::error::{Error, Result};
use crate::forward::{snapshots, DataSet, LowerBidiagonal};
use crate::gram::GramPair;
use crate::linalg::chebyshev::ChebyshevSeries;
use crate::linalg::{cholesky_upper, inverse_congruence, solve_upper_transpose, sym_eig, DenseMatrix};

/// Entries of the projected propagator outside the tridiagonal band, relative
/// to its largest entry, above which the data are reported as inconsistent.
pub const OFFBAND_TOL: f64 = 1e-10;

/// Reduced model `(P̃, b̃ = √D_0 e₁)` matching `2n` scalar data samples.
#[derive(Clone, Debug, PartialEq)]
pub struct SisoRom {
    pub n: usize,
    pub tau: f64,
    pub p_tilde: DenseMatrix,
    pub b_norm: f64,
    /// Cholesky factor of the mass matrix, `mass = RᵀR`.
    pub r_factor: DenseMatrix,
    /// Largest off-tridiagonal entry of `R⁻ᵀ stiff R⁻¹` before it was zeroed.
    pub offband: f64,
}

/// Bidiagonal factor `ξ(P̃) = L̃L̃ᵀ` and the extracted coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct SisoFactor {
    pub l_tilde: LowerBidiagonal,
    pub gammas: Vec<f64>,
    pub gamma_hats: Vec<f64>,
}

impl SisoFactor {
    pub fn n(&self) -> usize {
        self.gammas.len()
    }
}

/// `ξ(P) = (2/τ²)(I − P)`.
pub fn xi(p: &DenseMatrix, tau: f64) -> DenseMatrix {
    DenseMatrix::identity(p.rows()).sub(p).scale(2.0 / (tau * tau))
}

/// `P = I − (τ²/2) x`, the inverse of [`xi`].
pub fn xi_inverse(x: &DenseMatrix, tau: f64) -> DenseMatrix {
    DenseMatrix::identity(x.rows()).sub(&x.scale(0.5 * tau * tau))
}

fn spectral_radius(p: &DenseMatrix) -> Result<f64> {
    let eig = sym_eig(p)?;
    Ok(eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

pub fn build_rom(data: &DataSet, n: usize) -> Result<SisoRom> {
    if data.m() != 1 {
        return Err(Error::ShapeMismatch(format!("single-sensor ROM needs m = 1, got m = {}", data.m())));
    }
    let gram = GramPair::from_data(data, n)?;
    let r = cholesky_upper(gram.mass.dense())?;
    let mut p = inverse_congruence(&r, gram.stiff.dense()).symmetrized();
    let scale = p.max_abs();
    let mut offband: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i.abs_diff(j) > 1 {
                offband = offband.max(p[(i, j)].abs());
                p[(i, j)] = 0.0;
            }
        }
    }
    let offband = if scale > 0.0 { offband / scale } else { 0.0 };
    let rho = spectral_radius(&p)?;
    if rho >= 1.0 {
        return Err(Error::NonContractive { spectral_radius: rho });
    }
    Ok(SisoRom { n, tau: data.tau(), p_tilde: p, b_norm: data.frame(0)[(0, 0)].sqrt(), r_factor: r, offband })
}

/// `D̃_k = b̃ᵀ T_k(P̃) b̃` for `k = 0..two_n`.
pub fn rom_data(rom: &SisoRom, two_n: usize) -> Result<DataSet> {
    let mut b = DenseMatrix::zeros(rom.n, 1);
    b[(0, 0)] = rom.b_norm;
    let frames = chebyshev_frames(&rom.p_tilde, &b, two_n);
    DataSet::new(rom.tau, frames)
}

pub(crate) fn chebyshev_frames(p: &DenseMatrix, b: &DenseMatrix, count: usize) -> Vec<DenseMatrix> {
    let mut frames = Vec::with_capacity(count);
    let mut prev: Option<DenseMatrix> = None;
    let mut cur = b.clone();
    for _ in 0..count {
        frames.push(b.t_matmul(&cur));
        let mut next = p.matmul(&cur);
        if let Some(prev) = prev {
            next = next.scale(2.0);
            next.add_assign_scaled(&prev, -1.0);
        }
        prev = Some(cur);
        cur = next;
    }
    frames
}

pub fn factorize(rom: &SisoRom) -> Result<SisoFactor> {
    let n = rom.n;
    let upper = cholesky_upper(&xi(&rom.p_tilde, rom.tau))?;
    let diag: Vec<f64> = (0..n).map(|j| -upper[(j, j)]).collect();
    let sub: Vec<f64> = (0..n.saturating_sub(1)).map(|j| -upper[(j, j + 1)]).collect();
    let mut gammas = Vec::with_capacity(n);
    let mut gamma_hats = Vec::with_capacity(n);
    gamma_hats.push(1.0 / (rom.b_norm * rom.b_norm));
    for j in 0..n {
        let g = 1.0 / (gamma_hats[j] * diag[j] * diag[j]);
        gammas.push(g);
        if j + 1 < n {
            gamma_hats.push(1.0 / (g * sub[j] * sub[j]));
        }
    }
    for (what, values) in [("gamma", &gammas), ("gamma_hat", &gamma_hats)] {
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0) || !v.is_finite()) {
            return Err(Error::NonPositive { what, index, value });
        }
    }
    Ok(SisoFactor { l_tilde: LowerBidiagonal { diag, sub }, gammas, gamma_hats })
}

/// Fine-grid orthonormal snapshots `V`, their duals `W` and the residuals
/// `‖VᵀV − I‖`, `‖WᵀW − I‖`, `‖L̃ − Vᵀ𝓛W‖` (Frobenius norms).
#[derive(Clone, Debug)]
pub struct VwDiagnostics {
    pub v: DenseMatrix,
    pub w: DenseMatrix,
    pub v_orthonormality: f64,
    pub w_orthonormality: f64,
    pub galerkin_residual: f64,
}

/// `sin(y)/y` with `y = τ√μ/2`, so that `𝓛 = L h(LᵀL)` satisfies
/// `𝓛𝓛ᵀ = (2/τ²)(I − cos(τ√(LLᵀ)))`.
fn exact_factor_scaling(tau: f64, mu: f64) -> f64 {
    let y = 0.5 * tau * mu.max(0.0).sqrt();
    if y < 1e-4 {
        1.0 - y * y / 6.0
    } else {
        y.sin() / y
    }
}

/// Builds the snapshot bases on the fine grid; `b` is the `N × 1` sensor
/// vector that generated the data.
pub fn diagnostics_vw(
    l_q: &LowerBidiagonal,
    b: &DenseMatrix,
    rom: &SisoRom,
    factor: &SisoFactor,
) -> Result<VwDiagnostics> {
    let n_fine = l_q.n();
    if b.rows() != n_fine || b.cols() != 1 {
        return Err(Error::ShapeMismatch(format!("sensor vector must be {n_fine}x1")));
    }
    if factor.n() != rom.n {
        return Err(Error::ShapeMismatch("factor and ROM orders differ".into()));
    }
    let n = rom.n;
    let tau = rom.tau;
    let snaps = snapshots(&l_q.gram(), b, tau, n)?;
    let mut p = DenseMatrix::zeros(n_fine, n);
    for (k, s) in snaps.iter().enumerate() {
        p.set_column(k, &s.column(0));
    }
    // V = P R⁻¹, so Vᵀ = R⁻ᵀ Pᵀ.
    let v = solve_upper_transpose(&rom.r_factor, &p.transpose()).transpose();

    let ltl = l_q.transpose_gram();
    let (_, hi) = ltl.gershgorin_bounds();
    let series = ChebyshevSeries::fit(|mu| exact_factor_scaling(tau, mu), 0.0, hi.max(1e-300), 1e-15)?;
    let mut lt_v = DenseMatrix::zeros(n_fine, n);
    for k in 0..n {
        lt_v.set_column(k, &l_q.matvec_transpose(&v.column(k)));
    }
    // 𝓛ᵀV = h(LᵀL) LᵀV.
    let script_lt_v = series.apply(&ltl, &lt_v);
    // W = 𝓛ᵀV L̃⁻ᵀ, i.e. L̃ Wᵀ = (𝓛ᵀV)ᵀ.
    let l_tilde = factor.l_tilde.to_dense();
    let w = solve_lower(&l_tilde, &script_lt_v.transpose()).transpose();

    let ident = DenseMatrix::identity(n);
    let v_orthonormality = v.t_matmul(&v).sub(&ident).norm_fro();
    let w_orthonormality = w.t_matmul(&w).sub(&ident).norm_fro();
    let galerkin = script_lt_v.t_matmul(&w);
    let galerkin_residual = galerkin.sub(&l_tilde).norm_fro();
    Ok(VwDiagnostics { v, w, v_orthonormality, w_orthonormality, galerkin_residual })
}

fn solve_lower(l: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    solve_upper_transpose(&l.transpose(), b)
}
