use crate::error::{Error, Result};
use crate::linalg::{spd_inv_sqrt, spd_inverse, spd_sqrt, DenseMatrix};
use crate::mimo_rom::MimoFactor;
use crate::siso_rom::SisoFactor;

/// Impedance samples on the staggered travel-time grid of the reference ROM.
#[derive(Clone, Debug, PartialEq)]
pub struct ImpedanceEstimate {
    /// `σ_j = γ̂⁰_j / γ̂_j`.
    pub primary_values: Vec<f64>,
    /// `σ̂_j = γ_j / γ⁰_j`.
    pub dual_values: Vec<f64>,
    /// `T_j`, midway between consecutive dual nodes.
    pub primary_nodes: Vec<f64>,
    /// `T̂_j = γ̂⁰_1 + … + γ̂⁰_j`.
    pub dual_nodes: Vec<f64>,
}

/// Ratios of the ROM coefficients to those of a unit-impedance reference.
pub fn impedance_estimates(factor: &SisoFactor, reference: &SisoFactor) -> Result<ImpedanceEstimate> {
    let n = factor.n();
    if reference.n() != n {
        return Err(Error::ShapeMismatch(format!("ROM orders differ: {n} vs {}", reference.n())));
    }
    for (what, values) in [
        ("gamma", &factor.gammas),
        ("gamma_hat", &factor.gamma_hats),
        ("reference gamma", &reference.gammas),
        ("reference gamma_hat", &reference.gamma_hats),
    ] {
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
            return Err(Error::NonPositive { what, index, value });
        }
    }
    let primary_values = (0..n).map(|j| reference.gamma_hats[j] / factor.gamma_hats[j]).collect();
    let dual_values = (0..n).map(|j| factor.gammas[j] / reference.gammas[j]).collect();
    let mut dual_nodes = Vec::with_capacity(n);
    let mut primary_nodes = Vec::with_capacity(n);
    let mut t = 0.0;
    for &h in &reference.gamma_hats {
        primary_nodes.push(t + 0.5 * h);
        t += h;
        dual_nodes.push(t);
    }
    Ok(ImpedanceEstimate { primary_values, dual_values, primary_nodes, dual_nodes })
}

/// Matrix analogues `√γ̂⁰_j γ̂_j⁻¹ √γ̂⁰_j` and `(γ⁰_j)^{-1/2} γ_j (γ⁰_j)^{-1/2}`
/// of the scalar ratios; reported for inspection only.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixImpedance {
    pub primary: Vec<DenseMatrix>,
    pub dual: Vec<DenseMatrix>,
}

pub fn mimo_impedance_report(factor: &MimoFactor, reference: &MimoFactor) -> Result<MatrixImpedance> {
    if factor.n() != reference.n() || factor.m() != reference.m() {
        return Err(Error::ShapeMismatch("block factors differ in shape".into()));
    }
    let mut primary = Vec::with_capacity(factor.n());
    let mut dual = Vec::with_capacity(factor.n());
    for j in 0..factor.n() {
        let s = spd_sqrt(&reference.gamma_hats[j])?;
        primary.push(s.matmul(&spd_inverse(&factor.gamma_hats[j])?).matmul(&s).symmetrized());
        let r = spd_inv_sqrt(&reference.gammas[j])?;
        dual.push(r.matmul(&factor.gammas[j]).matmul(&r).symmetrized());
    }
    Ok(MatrixImpedance { primary, dual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::LowerBidiagonal;

    fn factor(gammas: Vec<f64>, gamma_hats: Vec<f64>) -> SisoFactor {
        let n = gammas.len();
        SisoFactor { l_tilde: LowerBidiagonal { diag: vec![-1.0; n], sub: vec![1.0; n - 1] }, gammas, gamma_hats }
    }

    #[test]
    fn reference_against_itself_is_unity() {
        let f = factor(vec![2.5, 1.1, 1.0], vec![0.3, 0.8, 1.0]);
        let est = impedance_estimates(&f, &f).unwrap();
        assert!(est.primary_values.iter().chain(&est.dual_values).all(|&v| v == 1.0));
        assert_eq!(est.dual_nodes, vec![0.3, 1.1, 2.1]);
        assert_eq!(est.primary_nodes, vec![0.15, 0.7, 1.6]);
    }

    #[test]
    fn nodes_interlace() {
        let f = factor(vec![1.0; 5], vec![0.3, 0.7, 0.9, 1.0, 1.0]);
        let est = impedance_estimates(&f, &f).unwrap();
        let mut prev = 0.0;
        for j in 0..5 {
            assert!(prev < est.primary_nodes[j] && est.primary_nodes[j] < est.dual_nodes[j]);
            prev = est.dual_nodes[j];
        }
    }

    #[test]
    fn order_one_ratio_is_first_sample_ratio() {
        let d0 = 2.0;
        let d = 3.0;
        let est = impedance_estimates(&factor(vec![1.0], vec![1.0 / d]), &factor(vec![1.0], vec![1.0 / d0])).unwrap();
        assert!((est.primary_values[0] - d / d0).abs() < 1e-15);
    }

    #[test]
    fn shape_and_sign_checks() {
        let a = factor(vec![1.0, 1.0], vec![1.0, 1.0]);
        let b = factor(vec![1.0], vec![1.0]);
        assert!(matches!(impedance_estimates(&a, &b), Err(Error::ShapeMismatch(_))));
        let bad = factor(vec![1.0, -1.0], vec![1.0, 1.0]);
        assert!(matches!(impedance_estimates(&bad, &a), Err(Error::NonPositive { index: 1, .. })));
    }
}
