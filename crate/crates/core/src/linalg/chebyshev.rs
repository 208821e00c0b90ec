//! Chebyshev expansions of scalar functions, applied to symmetric sparse
//! operators through the three-term recurrence.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::sparse::SparseMatrix;
use super::DenseMatrix;
use crate::error::{Error, Result};

/// Truncated expansion `f(λ) ≈ Σ_k c_k T_k(x(λ))` on `[lo, hi]`, with
/// `x(λ) = (2λ − lo − hi)/(hi − lo)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChebyshevSeries {
    lo: f64,
    hi: f64,
    coeffs: Vec<f64>,
}

const MAX_NODES: usize = 1 << 17;

/// Smallest relative tolerance the FFT-based interpolation can resolve.
pub const NOISE_FLOOR: f64 = 64.0 * f64::EPSILON;

impl ChebyshevSeries {
    /// Interpolates `f` at Chebyshev points, doubling the node count until the
    /// trailing coefficients fall below `tol` times the larger of `max|c_k|`
    /// and the largest sampled `|f|`. Tolerances below the
    /// rounding floor of the transform are raised to [`NOISE_FLOOR`].
    pub fn fit(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Result<Self> {
        let tol = tol.max(NOISE_FLOOR);
        if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidArgument(format!("bad expansion interval [{lo}, {hi}]")));
        }
        let mut planner = FftPlanner::new();
        let mut nodes = 64;
        loop {
            let (coeffs, vscale) = interpolate(&f, lo, hi, nodes, &mut planner)?;
            let scale = coeffs.iter().fold(vscale, |m, c| m.max(c.abs()));
            if scale == 0.0 {
                return Ok(Self { lo, hi, coeffs: vec![0.0] });
            }
            let tail_start = nodes - nodes / 4;
            let tail = coeffs[tail_start..].iter().fold(0.0f64, |m, c| m.max(c.abs()));
            if tail <= tol * scale {
                let cut = coeffs.iter().rposition(|c| c.abs() > tol * scale).unwrap_or(0);
                let mut coeffs = coeffs;
                coeffs.truncate(cut + 1);
                return Ok(Self { lo, hi, coeffs });
            }
            if nodes >= MAX_NODES {
                return Err(Error::NoConvergence("chebyshev expansion"));
            }
            nodes *= 2;
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// Scalar evaluation by Clenshaw summation.
    pub fn eval(&self, lambda: f64) -> f64 {
        let x = (2.0 * lambda - self.lo - self.hi) / (self.hi - self.lo);
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * x * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        x * b1 - b2 + self.coeffs[0]
    }

    /// `f(op) · v` where the spectrum of `op` lies in the expansion interval.
    pub fn apply(&self, op: &SparseMatrix, v: &DenseMatrix) -> DenseMatrix {
        let alpha = 2.0 / (self.hi - self.lo);
        let beta = -(self.hi + self.lo) / (self.hi - self.lo);
        let mut acc = v.scale(self.coeffs[0]);
        if self.coeffs.len() == 1 {
            return acc;
        }
        let mut prev = v.clone();
        let mut cur = op.apply(v);
        for (c, p) in cur.as_mut_slice().iter_mut().zip(v.as_slice()) {
            *c = alpha * *c + beta * p;
        }
        acc.add_assign_scaled(&cur, self.coeffs[1]);
        let mut work = DenseMatrix::zeros(v.rows(), v.cols());
        for &ck in &self.coeffs[2..] {
            op.apply_into(&cur, &mut work);
            for ((w, &c), &p) in work.as_mut_slice().iter_mut().zip(cur.as_slice()).zip(prev.as_slice()) {
                *w = 2.0 * (alpha * *w + beta * c) - p;
            }
            std::mem::swap(&mut prev, &mut cur);
            std::mem::swap(&mut cur, &mut work);
            acc.add_assign_scaled(&cur, ck);
        }
        acc
    }
}

fn interpolate(
    f: &impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    nodes: usize,
    planner: &mut FftPlanner<f64>,
) -> Result<(Vec<f64>, f64)> {
    use std::f64::consts::PI;
    let k = nodes;
    let mut vscale: f64 = 0.0;
    let mut buf = vec![Complex::new(0.0, 0.0); 2 * k];
    for (j, slot) in buf.iter_mut().take(k).enumerate() {
        let theta = PI * (j as f64 + 0.5) / k as f64;
        let lambda = 0.5 * (hi + lo) + 0.5 * (hi - lo) * theta.cos();
        let fx = f(lambda);
        if !fx.is_finite() {
            return Err(Error::Domain(format!("function is not finite at {lambda:e}")));
        }
        vscale = vscale.max(fx.abs());
        *slot = Complex::new(fx, 0.0);
    }
    planner.plan_fft_forward(2 * k).process(&mut buf);
    let mut coeffs: Vec<f64> = (0..k)
        .map(|m| {
            let phase = Complex::from_polar(1.0, -PI * m as f64 / (2 * k) as f64);
            2.0 / k as f64 * (phase * buf[m]).re
        })
        .collect();
    coeffs[0] *= 0.5;
    Ok((coeffs, vscale))
}
