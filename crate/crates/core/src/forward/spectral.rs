use super::data::DataSet;
use super::medium::Pulse;
use crate::error::{Error, Result};
use crate::linalg::chebyshev::ChebyshevSeries;
use crate::linalg::sparse::SparseMatrix;
use crate::linalg::{sym_eig, DenseMatrix};

const SERIES_TOL: f64 = 1e-15;

/// `cos(t√λ)`, continued as `cosh(t√−λ)` below zero.
pub fn cos_sqrt(t: f64, lambda: f64) -> f64 {
    if lambda >= 0.0 {
        (t * lambda.sqrt()).cos()
    } else {
        (t * (-lambda).sqrt()).cosh()
    }
}

/// Expansion interval `[0, λ_max]`; the fine-grid operators are positive
/// semidefinite (`L Lᵀ`, or `G K G` with `K` a weakly diagonally dominant
/// M-matrix).
fn spectral_interval(op: &SparseMatrix) -> (f64, f64) {
    let (_, hi) = op.gershgorin_bounds();
    (0.0, if hi > 0.0 { hi } else { 1.0 })
}

/// The propagator `𝒫 = cos(τ√S)` as a Chebyshev series in `S`.
#[derive(Clone, Debug)]
pub struct Propagator<'a> {
    op: &'a SparseMatrix,
    series: ChebyshevSeries,
}

impl<'a> Propagator<'a> {
    pub fn new(op: &'a SparseMatrix, tau: f64) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(Error::InvalidArgument(format!("sampling interval must be positive, got {tau}")));
        }
        let (lo, hi) = spectral_interval(op);
        let series = ChebyshevSeries::fit(|l| cos_sqrt(tau, l), lo, hi, SERIES_TOL)?;
        Ok(Self { op, series })
    }

    pub fn apply(&self, v: &DenseMatrix) -> DenseMatrix {
        self.series.apply(self.op, v)
    }

    pub fn degree(&self) -> usize {
        self.series.degree()
    }
}

/// Sensor vectors `b = [f̂(√S)]^{1/2} δ` with `f̂` clamped at zero.
pub fn sensor_vectors(op: &SparseMatrix, deltas: &DenseMatrix, pulse: &Pulse) -> Result<DenseMatrix> {
    if deltas.rows() != op.n() {
        return Err(Error::ShapeMismatch(format!("operator has {} rows, deltas have {}", op.n(), deltas.rows())));
    }
    for s in 0..deltas.cols() {
        for t in 0..s {
            if deltas.column(s) == deltas.column(t) {
                return Err(Error::DegenerateSensors(format!("sensors {t} and {s} coincide")));
            }
        }
    }
    let (lo, hi) = spectral_interval(op);
    let g = |l: f64| pulse.spectrum_of_eigenvalue(l).max(0.0).sqrt();
    let series = ChebyshevSeries::fit(g, lo, hi, 1e-14)?;
    let b = series.apply(op, deltas);
    if crate::linalg::cholesky_upper(&b.t_matmul(&b)).is_err() {
        return Err(Error::DegenerateSensors("sensor vectors are linearly dependent".into()));
    }
    Ok(b)
}

/// Primary snapshots `P_k = T_k(𝒫) b`, `k = 0..count`.
pub fn snapshots(op: &SparseMatrix, b: &DenseMatrix, tau: f64, count: usize) -> Result<Vec<DenseMatrix>> {
    let prop = Propagator::new(op, tau)?;
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return Ok(out);
    }
    out.push(b.clone());
    if count == 1 {
        return Ok(out);
    }
    out.push(prop.apply(b));
    for k in 2..count {
        let mut next = prop.apply(&out[k - 1]).scale(2.0);
        next.add_assign_scaled(&out[k - 2], -1.0);
        out.push(next);
    }
    Ok(out)
}

/// Data `D_k = bᵀ cos(kτ√S) b`, `k = 0..two_n`.
pub fn synthesize_spectral(op: &SparseMatrix, b: &DenseMatrix, tau: f64, two_n: usize) -> Result<DataSet> {
    let prop = Propagator::new(op, tau)?;
    let mut frames = Vec::with_capacity(two_n);
    let mut prev: Option<DenseMatrix> = None;
    let mut cur = b.clone();
    for _ in 0..two_n {
        frames.push(b.t_matmul(&cur));
        let mut next = prop.apply(&cur);
        match prev {
            None => {}
            Some(p) => {
                next = next.scale(2.0);
                next.add_assign_scaled(&p, -1.0);
            }
        }
        prev = Some(cur);
        cur = next;
    }
    DataSet::new(tau, frames)
}

/// Dense-eigensolver evaluation of `D_k`; intended for small operators.
pub fn synthesize_dense(op: &SparseMatrix, b: &DenseMatrix, tau: f64, two_n: usize) -> Result<DataSet> {
    let eig = sym_eig(&op.to_dense())?;
    let coeffs = eig.vectors.t_matmul(b);
    let m = b.cols();
    let mut frames = Vec::with_capacity(two_n);
    for k in 0..two_n {
        let mut f = DenseMatrix::zeros(m, m);
        for (l, &lambda) in eig.values.iter().enumerate() {
            let w = (k as f64 * tau * lambda.max(0.0).sqrt()).cos();
            let row = coeffs.row(l);
            for i in 0..m {
                for j in 0..m {
                    f[(i, j)] += w * row[i] * row[j];
                }
            }
        }
        frames.push(f);
    }
    DataSet::new(tau, frames)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::grid::FineModel;
    use crate::forward::medium::{Medium1D, Medium2D};

    #[test]
    fn scalar_toy_alternates() {
        let pi2 = std::f64::consts::PI.powi(2);
        let op = SparseMatrix::from_triplets(1, &[(0, 0, pi2)]).unwrap();
        let b = DenseMatrix::from_diag(&[1.0]);
        let d = synthesize_spectral(&op, &b, 1.0, 6).unwrap();
        for (k, v) in d.scalar_values().iter().enumerate() {
            let want = if k % 2 == 0 { 1.0 } else { -1.0 };
            assert!((v - want).abs() < 1e-12, "k={k}: {v}");
        }
    }

    #[test]
    fn first_frame_is_gram_of_sensors() {
        let m = Medium1D::from_profile(200, 10.0, |t| 1.0 + 0.1 * t).unwrap();
        let f = FineModel::from_1d(&m);
        let pulse = Pulse::new(4.0, 2.0).unwrap();
        let b = sensor_vectors(f.operator(), f.deltas(), &pulse).unwrap();
        let d = synthesize_spectral(f.operator(), &b, 0.5, 4).unwrap();
        assert!((d.frame(0)[(0, 0)] - b.t_matmul(&b)[(0, 0)]).abs() < 1e-13 * d.frame(0)[(0, 0)]);
    }

    #[test]
    fn chebyshev_engine_matches_dense_eigensolver() {
        let m = Medium2D::from_fn(7, 6, 1.0, vec![1, 3, 5], |x, z| (1.0 + 0.3 * (x + z).sin().abs(), 1.0)).unwrap();
        let f = FineModel::from_2d(&m).unwrap();
        let pulse = Pulse::new(0.8, 0.4).unwrap();
        let b = sensor_vectors(f.operator(), f.deltas(), &pulse).unwrap();
        let fast = synthesize_spectral(f.operator(), &b, 1.0, 12).unwrap();
        let slow = synthesize_dense(f.operator(), &b, 1.0, 12).unwrap();
        assert!(fast.relative_distance(&slow).unwrap() < 1e-12);
        let bd = crate::linalg::apply_spectral_fn(
            &f.operator().to_dense(),
            |l| pulse.spectrum(l.max(0.0).sqrt()).sqrt(),
            f.deltas(),
        )
        .unwrap();
        assert!(bd.sub(&b).max_abs() < 1e-12 * b.max_abs());
    }

    #[test]
    fn sensor_vector_is_localized_near_the_surface() {
        let m = Medium1D::homogeneous(2000, 50.0).unwrap();
        let f = FineModel::from_1d(&m);
        let pulse = Pulse::new(1.2, 0.6).unwrap();
        let b = sensor_vectors(f.operator(), f.deltas(), &pulse).unwrap().column(0);
        let total: f64 = b.iter().map(|v| v * v).sum();
        let support = (pulse.half_support() / 2.0 / m.dt()) as usize;
        let near: f64 = b[..support].iter().map(|v| v * v).sum();
        assert!(near >= 0.9 * total, "{near} of {total}");
    }

    #[test]
    fn coincident_sensors_are_rejected() {
        let op = SparseMatrix::from_triplets(2, &[(0, 0, 1.0), (1, 1, 1.0)]).unwrap();
        let deltas = DenseMatrix::from_rows(&[&[1.0, 1.0], &[0.0, 0.0]]);
        let pulse = Pulse::new(1.0, 1.0).unwrap();
        assert!(matches!(sensor_vectors(&op, &deltas, &pulse), Err(Error::DegenerateSensors(_))));
    }

    #[test]
    fn propagator_is_a_contraction() {
        let m = Medium1D::from_profile(60, 6.0, |t| 1.0 + 0.5 * (t > 3.0) as u8 as f64).unwrap();
        let f = FineModel::from_1d(&m);
        let tau = 0.9 / f.spectrum_bound().sqrt();
        let p = crate::linalg::apply_spectral_fn(
            &f.operator().to_dense(),
            |l| (tau * l.max(0.0).sqrt()).cos(),
            &DenseMatrix::identity(60),
        )
        .unwrap();
        let e = sym_eig(&p.symmetrized()).unwrap();
        assert!(e.values.iter().all(|v| v.abs() < 1.0));
    }
}
