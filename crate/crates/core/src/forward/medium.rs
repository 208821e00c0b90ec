use crate::error::{Error, Result};

/// Modulated Gaussian source pulse.
///
/// The time signal is `f(t) = a·B/√(2π)·cos(ω_o t)·exp(−B²t²/2)`, whose
/// Fourier transform is `a·½[exp(−(ω−ω_o)²/2B²) + exp(−(ω+ω_o)²/2B²)]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pulse {
    pub center_frequency: f64,
    pub bandwidth: f64,
    pub amplitude: f64,
}

impl Pulse {
    pub fn new(center_frequency: f64, bandwidth: f64) -> Result<Self> {
        if !(bandwidth > 0.0) || !bandwidth.is_finite() {
            return Err(Error::InvalidArgument(format!("pulse bandwidth must be positive, got {bandwidth}")));
        }
        if !(center_frequency >= 0.0) || !center_frequency.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "pulse center frequency must be non-negative, got {center_frequency}"
            )));
        }
        Ok(Self { center_frequency, bandwidth, amplitude: 1.0 })
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    /// Rescales the amplitude so that `f̂(0) = 1`. With this normalization
    /// the reduced model of a homogeneous medium has `γ_j ≈ γ̂_j ≈ τ`.
    pub fn unit_dc(mut self) -> Self {
        let w = self.center_frequency / self.bandwidth;
        self.amplitude = (0.5 * w * w).exp();
        self
    }

    /// `f̂(ω)`.
    pub fn spectrum(&self, omega: f64) -> f64 {
        let b2 = 2.0 * self.bandwidth * self.bandwidth;
        let w0 = self.center_frequency;
        0.5 * self.amplitude * ((-(omega - w0).powi(2) / b2).exp() + (-(omega + w0).powi(2) / b2).exp())
    }

    /// `f̂(√λ)`, continued analytically to `λ < 0` (where it is even in
    /// `√λ`, hence entire in `λ`).
    pub fn spectrum_of_eigenvalue(&self, lambda: f64) -> f64 {
        if lambda >= 0.0 {
            return self.spectrum(lambda.sqrt());
        }
        let y = (-lambda).sqrt();
        let b2 = self.bandwidth * self.bandwidth;
        let w0 = self.center_frequency;
        self.amplitude * ((y * y - w0 * w0) / (2.0 * b2)).exp() * (y * w0 / b2).cos()
    }

    /// `f(t)`.
    pub fn wavelet(&self, t: f64) -> f64 {
        let b = self.bandwidth;
        self.amplitude * b / (2.0 * std::f64::consts::PI).sqrt()
            * (self.center_frequency * t).cos()
            * (-0.5 * b * b * t * t).exp()
    }

    /// `f'(t)`.
    pub fn wavelet_derivative(&self, t: f64) -> f64 {
        let b = self.bandwidth;
        let w0 = self.center_frequency;
        self.amplitude * b / (2.0 * std::f64::consts::PI).sqrt()
            * (-w0 * (w0 * t).sin() - b * b * t * (w0 * t).cos())
            * (-0.5 * b * b * t * t).exp()
    }

    /// Half-width beyond which the envelope is below `1e-17`.
    pub fn half_support(&self) -> f64 {
        9.0 / self.bandwidth
    }

    /// Highest frequency carrying appreciable energy (`ω_o + 4B`).
    pub fn max_frequency(&self) -> f64 {
        self.center_frequency + 4.0 * self.bandwidth
    }
}

/// One-dimensional medium in travel-time coordinates. Primary nodes sit at
/// `T = (j−1)ΔT` and dual nodes at `T = (j−½)ΔT`, `j = 1..N`.
#[derive(Clone, Debug, PartialEq)]
pub struct Medium1D {
    dt: f64,
    sigma_primary: Vec<f64>,
    sigma_dual: Vec<f64>,
}

impl Medium1D {
    pub fn new(dt: f64, sigma_primary: Vec<f64>, sigma_dual: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidMedium(format!("travel-time step must be positive, got {dt}")));
        }
        if sigma_primary.is_empty() || sigma_primary.len() != sigma_dual.len() {
            return Err(Error::InvalidMedium(format!(
                "primary and dual impedance samples must be non-empty and equal in length ({} vs {})",
                sigma_primary.len(),
                sigma_dual.len()
            )));
        }
        check_positive("sigma_primary", &sigma_primary)?;
        check_positive("sigma_dual", &sigma_dual)?;
        Ok(Self { dt, sigma_primary, sigma_dual })
    }

    /// Samples `sigma(T)` on `n` primary and dual nodes spanning `[0, t_ell]`.
    pub fn from_profile(n: usize, t_ell: f64, sigma: impl Fn(f64) -> f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidMedium("grid must have at least one node".into()));
        }
        let dt = t_ell / n as f64;
        let primary = (0..n).map(|j| sigma(j as f64 * dt)).collect();
        let dual = (0..n).map(|j| sigma((j as f64 + 0.5) * dt)).collect();
        Self::new(dt, primary, dual)
    }

    pub fn homogeneous(n: usize, t_ell: f64) -> Result<Self> {
        Self::from_profile(n, t_ell, |_| 1.0)
    }

    pub fn n(&self) -> usize {
        self.sigma_primary.len()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t_ell(&self) -> f64 {
        self.dt * self.n() as f64
    }

    pub fn sigma_primary(&self) -> &[f64] {
        &self.sigma_primary
    }

    pub fn sigma_dual(&self) -> &[f64] {
        &self.sigma_dual
    }

    /// Medium with `ln σ = ln σ_self + eps·(ln σ_other − ln σ_self)`.
    pub fn log_interpolate(&self, other: &Medium1D, eps: f64) -> Result<Self> {
        if self.n() != other.n() || self.dt != other.dt {
            return Err(Error::ShapeMismatch("media do not share a grid".into()));
        }
        Self::new(
            self.dt,
            log_mix(&self.sigma_primary, &other.sigma_primary, eps),
            log_mix(&self.sigma_dual, &other.sigma_dual, eps),
        )
    }
}

/// Two-dimensional medium on a node grid with `nx` columns and `ny` rows.
/// Row 0 is the accessible (sensor) boundary; node `(i, j)` sits at
/// `x = (i+1)h`, depth `z = jh`, and zero pressure is imposed one spacing
/// beyond the left, right and bottom rows.
#[derive(Clone, Debug, PartialEq)]
pub struct Medium2D {
    nx: usize,
    ny: usize,
    h: f64,
    sigma: Vec<f64>,
    c: Vec<f64>,
    sensors: Vec<usize>,
}

impl Medium2D {
    /// `sigma` and `c` are row-major (`index = j·nx + i`); `sensors` lists the
    /// column indices of the sensors on row 0.
    pub fn new(nx: usize, ny: usize, h: f64, sigma: Vec<f64>, c: Vec<f64>, sensors: Vec<usize>) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidMedium("grid dimensions must be positive".into()));
        }
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidMedium(format!("grid spacing must be positive, got {h}")));
        }
        if sigma.len() != nx * ny || c.len() != nx * ny {
            return Err(Error::InvalidMedium(format!(
                "fields must have {} samples (sigma has {}, c has {})",
                nx * ny,
                sigma.len(),
                c.len()
            )));
        }
        check_positive("sigma", &sigma)?;
        check_positive("c", &c)?;
        if sensors.is_empty() {
            return Err(Error::DegenerateSensors("no sensors given".into()));
        }
        for (k, &s) in sensors.iter().enumerate() {
            if s >= nx {
                return Err(Error::DegenerateSensors(format!(
                    "sensor {k} at column {s} is outside the accessible row of width {nx}"
                )));
            }
            if sensors[..k].contains(&s) {
                return Err(Error::DegenerateSensors(format!(
                    "sensor {k} coincides with an earlier sensor at column {s}"
                )));
            }
        }
        Ok(Self { nx, ny, h, sigma, c, sensors })
    }

    /// Builds fields from a function of the physical position `(x, z)`
    /// returning `(σ, c)`.
    pub fn from_fn(
        nx: usize,
        ny: usize,
        h: f64,
        sensors: Vec<usize>,
        field: impl Fn(f64, f64) -> (f64, f64),
    ) -> Result<Self> {
        let mut sigma = Vec::with_capacity(nx * ny);
        let mut c = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let (s, v) = field((i + 1) as f64 * h, j as f64 * h);
                sigma.push(s);
                c.push(v);
            }
        }
        Self::new(nx, ny, h, sigma, c, sensors)
    }

    pub fn homogeneous(nx: usize, ny: usize, h: f64, c: f64, sensors: Vec<usize>) -> Result<Self> {
        Self::new(nx, ny, h, vec![1.0; nx * ny], vec![c; nx * ny], sensors)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn sensors(&self) -> &[usize] {
        &self.sensors
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn position(&self, i: usize, j: usize) -> (f64, f64) {
        ((i + 1) as f64 * self.h, j as f64 * self.h)
    }

    /// Control-volume area of node `(i, j)`; half cells on the sensor row.
    pub fn cell_volume(&self, _i: usize, j: usize) -> f64 {
        if j == 0 {
            0.5 * self.h * self.h
        } else {
            self.h * self.h
        }
    }

    /// Same grid and speed, `ln σ = ln σ_self + eps·(ln σ_other − ln σ_self)`.
    pub fn log_interpolate(&self, other: &Medium2D, eps: f64) -> Result<Self> {
        self.check_same_grid(other)?;
        if self.c != other.c {
            return Err(Error::InvalidMedium("interpolated media must share the wave speed".into()));
        }
        Self::new(
            self.nx,
            self.ny,
            self.h,
            log_mix(&self.sigma, &other.sigma, eps),
            self.c.clone(),
            self.sensors.clone(),
        )
    }

    pub fn check_same_grid(&self, other: &Medium2D) -> Result<()> {
        if self.nx != other.nx || self.ny != other.ny || self.h != other.h || self.sensors != other.sensors {
            return Err(Error::ShapeMismatch("media do not share grid and sensors".into()));
        }
        Ok(())
    }
}

/// Either kind of medium.
#[derive(Clone, Debug, PartialEq)]
pub enum Medium {
    OneD(Medium1D),
    TwoD(Medium2D),
}

impl Medium {
    pub fn sensor_count(&self) -> usize {
        match self {
            Medium::OneD(_) => 1,
            Medium::TwoD(m) => m.sensors().len(),
        }
    }

    pub fn log_interpolate(&self, other: &Medium, eps: f64) -> Result<Medium> {
        match (self, other) {
            (Medium::OneD(a), Medium::OneD(b)) => Ok(Medium::OneD(a.log_interpolate(b, eps)?)),
            (Medium::TwoD(a), Medium::TwoD(b)) => Ok(Medium::TwoD(a.log_interpolate(b, eps)?)),
            _ => Err(Error::ShapeMismatch("cannot mix 1D and 2D media".into())),
        }
    }
}

impl From<Medium1D> for Medium {
    fn from(m: Medium1D) -> Self {
        Medium::OneD(m)
    }
}

impl From<Medium2D> for Medium {
    fn from(m: Medium2D) -> Self {
        Medium::TwoD(m)
    }
}

fn check_positive(what: &'static str, values: &[f64]) -> Result<()> {
    if let Some((k, v)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidMedium(format!("{what}[{k}] = {v} is not a positive finite value")));
    }
    Ok(())
}

fn log_mix(base: &[f64], target: &[f64], eps: f64) -> Vec<f64> {
    base.iter().zip(target).map(|(&a, &b)| (a.ln() + eps * (b.ln() - a.ln())).exp()).collect()
}
