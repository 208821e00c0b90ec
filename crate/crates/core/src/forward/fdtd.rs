use rayon::prelude::*;

use super::data::DataSet;
use super::grid::FineModel;
use super::medium::Pulse;
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// Default number of leapfrog steps per sampling interval.
pub const DEFAULT_SUBSTEPS: usize = 16;

/// Leapfrog integration of `w'' + S w = f'(t) δ_s` for every source `s`,
/// started at rest before the pulse. Returns the even-extension samples
/// `D_k = δᵀ(w(kτ) + w(−kτ))`.
pub fn synthesize_fdtd(model: &FineModel, pulse: &Pulse, tau: f64, two_n: usize, substeps: usize) -> Result<DataSet> {
    if substeps < 8 {
        return Err(Error::InvalidArgument(format!("need at least 8 substeps per sample, got {substeps}")));
    }
    if !(tau > 0.0) {
        return Err(Error::InvalidArgument(format!("sampling interval must be positive, got {tau}")));
    }
    let dt = tau / substeps as f64;
    check_cfl(model, dt)?;

    let lead = (pulse.half_support() / tau).ceil() as usize;
    let m = model.m();
    let traces: Vec<Vec<Vec<f64>>> =
        (0..m).into_par_iter().map(|s| run_source(model, pulse, s, dt, substeps, lead, two_n)).collect();

    let mut frames = Vec::with_capacity(two_n);
    for k in 0..two_n {
        let mut f = DenseMatrix::zeros(m, m);
        for (s, trace) in traces.iter().enumerate() {
            let forward = &trace[lead + k];
            let backward = if k <= lead { Some(&trace[lead - k]) } else { None };
            for r in 0..m {
                f[(s, r)] = forward[r] + backward.map_or(0.0, |b| b[r]);
            }
        }
        frames.push(f.symmetrized());
    }
    DataSet::new(tau, frames)
}

/// Stability check: `c·Δt/h ≤ 1/√d` and `Δt < 2/√λ_max`.
pub fn check_cfl(model: &FineModel, dt: f64) -> Result<()> {
    let limit = 1.0 / (model.dimension() as f64).sqrt();
    let ratio = model.max_speed() * dt / model.spacing();
    if ratio > limit {
        return Err(Error::CflViolation { ratio, limit });
    }
    let spectral = dt * model.spectrum_bound().sqrt() / 2.0;
    if spectral >= 1.0 {
        return Err(Error::CflViolation { ratio: spectral, limit: 1.0 });
    }
    Ok(())
}

/// Receiver samples `δ_rᵀ w(kτ)` for `k = −lead..two_n`.
fn run_source(
    model: &FineModel,
    pulse: &Pulse,
    s: usize,
    dt: f64,
    substeps: usize,
    lead: usize,
    two_n: usize,
) -> Vec<Vec<f64>> {
    let op = model.operator();
    let n = model.n();
    let m = model.m();
    let deltas = model.deltas();
    let source: Vec<(usize, f64)> = (0..n).filter(|&i| deltas[(i, s)] != 0.0).map(|i| (i, deltas[(i, s)])).collect();
    let receivers: Vec<Vec<(usize, f64)>> =
        (0..m).map(|r| (0..n).filter(|&i| deltas[(i, r)] != 0.0).map(|i| (i, deltas[(i, r)])).collect()).collect();
    let sample =
        |w: &[f64]| -> Vec<f64> { receivers.iter().map(|rec| rec.iter().map(|&(i, d)| d * w[i]).sum()).collect() };

    let tau = dt * substeps as f64;
    let t0 = -(lead as f64) * tau;
    let total = lead + two_n;
    let mut prev = vec![0.0; n];
    let mut cur = vec![0.0; n];
    let mut out = Vec::with_capacity(total);
    out.push(sample(&cur));
    let dt2 = dt * dt;
    for step in 0..(total - 1) * substeps {
        let t = t0 + step as f64 * dt;
        let sw = op.matvec(&cur);
        let forcing = pulse.wavelet_derivative(t);
        let mut next: Vec<f64> = (0..n).map(|i| 2.0 * cur[i] - prev[i] - dt2 * sw[i]).collect();
        for &(i, d) in &source {
            next[i] += dt2 * forcing * d;
        }
        prev = std::mem::replace(&mut cur, next);
        if (step + 1) % substeps == 0 {
            out.push(sample(&cur));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::medium::{Medium1D, Medium2D};
    use crate::forward::spectral::{sensor_vectors, synthesize_spectral};

    #[test]
    fn zero_amplitude_gives_zero_data() {
        let m = Medium1D::homogeneous(100, 10.0).unwrap();
        let f = FineModel::from_1d(&m);
        let pulse = Pulse::new(1.0, 0.5).unwrap().with_amplitude(0.0);
        let d = synthesize_fdtd(&f, &pulse, 1.0, 6, 16).unwrap();
        assert_eq!(d.max_abs(), 0.0);
    }

    #[test]
    fn cfl_violation_is_reported() {
        let m = Medium1D::homogeneous(100, 10.0).unwrap();
        let f = FineModel::from_1d(&m);
        let pulse = Pulse::new(1.0, 0.5).unwrap();
        assert!(matches!(synthesize_fdtd(&f, &pulse, 2.0, 4, 8), Err(Error::CflViolation { .. })));
        assert!(matches!(synthesize_fdtd(&f, &pulse, 0.5, 4, 4), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn refinement_is_second_order() {
        let m = Medium1D::from_profile(200, 20.0, |t| if t < 8.0 { 1.0 } else { 1.5 }).unwrap();
        let f = FineModel::from_1d(&m);
        let pulse = Pulse::new(1.0, 0.5).unwrap();
        let tau = 1.0;
        let d1 = synthesize_fdtd(&f, &pulse, tau, 20, 20).unwrap();
        let d2 = synthesize_fdtd(&f, &pulse, tau, 20, 40).unwrap();
        let d3 = synthesize_fdtd(&f, &pulse, tau, 20, 80).unwrap();
        let e1 = d1.difference(&d2).unwrap().max_abs();
        let e2 = d2.difference(&d3).unwrap().max_abs();
        let ratio = e1 / e2;
        assert!((3.0..=5.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn early_frames_include_the_time_reversed_branch() {
        let m = Medium1D::homogeneous(400, 40.0).unwrap();
        let f = FineModel::from_1d(&m);
        let pulse = Pulse::new(1.0, 0.5).unwrap();
        let b = sensor_vectors(f.operator(), f.deltas(), &pulse).unwrap();
        let spectral = synthesize_spectral(f.operator(), &b, 1.0, 20).unwrap();
        let fdtd = synthesize_fdtd(&f, &pulse, 1.0, 20, 64).unwrap();
        assert!(fdtd.relative_distance(&spectral).unwrap() < 2e-3);
    }

    #[test]
    fn homogeneous_2d_agrees_with_spectral() {
        let m = Medium2D::homogeneous(40, 30, 1.0, 1.0, vec![12, 20, 28]).unwrap();
        let f = FineModel::from_2d(&m).unwrap();
        let pulse = Pulse::new(0.3, 0.15).unwrap();
        let tau = 4.0;
        let b = sensor_vectors(f.operator(), f.deltas(), &pulse).unwrap();
        let spectral = synthesize_spectral(f.operator(), &b, tau, 20).unwrap();
        let fdtd = synthesize_fdtd(&f, &pulse, tau, 20, DEFAULT_SUBSTEPS).unwrap();
        let rel = fdtd.relative_distance(&spectral).unwrap();
        assert!(rel <= 0.01, "relative distance {rel}");
        for fr in fdtd.frames() {
            assert!(fr.asymmetry() <= 1e-10);
        }
    }
}
