use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::rtm::Image;

/// Grows a row-major mask by `radius` cells in the max-norm.
pub fn dilate(mask: &[bool], nx: usize, ny: usize, radius: usize) -> Vec<bool> {
    assert_eq!(mask.len(), nx * ny, "mask size does not match the grid");
    let mut out = vec![false; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            if !mask[j * nx + i] {
                continue;
            }
            for jj in j.saturating_sub(radius)..(j + radius + 1).min(ny) {
                for ii in i.saturating_sub(radius)..(i + radius + 1).min(nx) {
                    out[jj * nx + ii] = true;
                }
            }
        }
    }
    out
}

/// `Σ_{outside} I² / Σ I²`; zero for an empty image.
pub fn off_mask_energy_fraction(image: &Image, mask: &[bool]) -> f64 {
    assert_eq!(mask.len(), image.values.len(), "mask size does not match the image");
    let total: f64 = image.values.iter().map(|v| v * v).sum();
    if total == 0.0 {
        return 0.0;
    }
    let outside: f64 = image.values.iter().zip(mask).filter(|(_, &m)| !m).map(|(v, _)| v * v).sum();
    outside / total
}

/// Distance in cells from the largest `|I|` inside `region` (or the whole
/// image when `region` is `None`) to the nearest node of `support`.
pub fn peak_distance(image: &Image, support: &[bool], region: Option<&[bool]>) -> f64 {
    let nx = image.nx;
    let peak = image
        .values
        .iter()
        .enumerate()
        .filter(|(k, _)| region.is_none_or(|r| r[*k]))
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(k, _)| k);
    let Some(peak) = peak else {
        return f64::INFINITY;
    };
    let (pi, pj) = ((peak % nx) as f64, (peak / nx) as f64);
    support
        .iter()
        .enumerate()
        .filter(|(_, &s)| s)
        .map(|(k, _)| (((k % nx) as f64 - pi).powi(2) + ((k / nx) as f64 - pj).powi(2)).sqrt())
        .fold(f64::INFINITY, f64::min)
}

/// Magnitude of the analytic signal, computed with a zero-padded FFT.
pub fn envelope(trace: &[f64]) -> Vec<f64> {
    let n = trace.len();
    if n == 0 {
        return Vec::new();
    }
    let len = (4 * n).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = trace.iter().map(|&v| Complex::new(v, 0.0)).collect();
    buf.resize(len, Complex::new(0.0, 0.0));
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(len).process(&mut buf);
    for (k, v) in buf.iter_mut().enumerate() {
        if k == 0 || k == len / 2 {
            continue;
        }
        *v *= if k < len / 2 { 2.0 } else { 0.0 };
    }
    planner.plan_fft_inverse(len).process(&mut buf);
    buf[..n].iter().map(|c| c.norm() / len as f64).collect()
}

/// Number of local maxima of the envelope above `fraction` of its maximum.
pub fn count_envelope_peaks(trace: &[f64], fraction: f64) -> usize {
    let env = envelope(trace);
    let top = env.iter().fold(0.0f64, |a, &b| a.max(b));
    if top == 0.0 {
        return 0;
    }
    let n = env.len();
    (0..n)
        .filter(|&k| {
            let left = if k > 0 { env[k - 1] } else { f64::NEG_INFINITY };
            let right = if k + 1 < n { env[k + 1] } else { f64::NEG_INFINITY };
            env[k] >= fraction * top && env[k] > left && env[k] >= right
        })
        .count()
}
