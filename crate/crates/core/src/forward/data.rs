use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// Relative asymmetry tolerated in a data frame before it is symmetrized.
pub const FRAME_SYMMETRY_TOL: f64 = 1e-10;

/// Time samples `D_k = D(kτ)`, `k = 0..two_n`, each a symmetric `m × m`
/// matrix (`m = 1` for single-sensor data).
#[derive(Clone, Debug, PartialEq)]
pub struct DataSet {
    m: usize,
    tau: f64,
    frames: Vec<DenseMatrix>,
}

impl DataSet {
    /// Validates shapes, finiteness and reciprocity; frames are stored
    /// exactly symmetrized.
    pub fn new(tau: f64, frames: Vec<DenseMatrix>) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(Error::InvalidArgument(format!("sampling interval must be positive, got {tau}")));
        }
        if frames.is_empty() || !frames.len().is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!("need a positive even number of frames, got {}", frames.len())));
        }
        let m = frames[0].rows();
        if m == 0 {
            return Err(Error::ShapeMismatch("frames must be at least 1x1".into()));
        }
        let mut out = Vec::with_capacity(frames.len());
        for (k, f) in frames.into_iter().enumerate() {
            if f.rows() != m || f.cols() != m {
                return Err(Error::ShapeMismatch(format!("frame {k} is {}x{}, expected {m}x{m}", f.rows(), f.cols())));
            }
            if !f.is_finite() {
                return Err(Error::InvalidArgument(format!("frame {k} has non-finite entries")));
            }
            let asymmetry = f.asymmetry();
            if asymmetry > FRAME_SYMMETRY_TOL {
                return Err(Error::NonSymmetric { asymmetry });
            }
            out.push(f.symmetrized());
        }
        Ok(Self { m, tau, frames: out })
    }

    pub fn scalar(tau: f64, values: &[f64]) -> Result<Self> {
        Self::new(tau, values.iter().map(|&v| DenseMatrix::from_diag(&[v])).collect())
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn two_n(&self) -> usize {
        self.frames.len()
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn frames(&self) -> &[DenseMatrix] {
        &self.frames
    }

    pub fn frame(&self, k: usize) -> &DenseMatrix {
        &self.frames[k]
    }

    /// The `(0, 0)` entry of every frame.
    pub fn scalar_values(&self) -> Vec<f64> {
        self.frames.iter().map(|f| f[(0, 0)]).collect()
    }

    /// First `count` frames.
    pub fn truncated(&self, count: usize) -> Result<Self> {
        if count > self.two_n() {
            return Err(Error::InsufficientFrames { required: count, available: self.two_n() });
        }
        Self::new(self.tau, self.frames[..count].to_vec())
    }

    /// Multiplies every frame by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self { m: self.m, tau: self.tau, frames: self.frames.iter().map(|f| f.scale(s)).collect() }
    }

    /// Frame-wise difference `self − other`.
    pub fn difference(&self, other: &DataSet) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(Self {
            m: self.m,
            tau: self.tau,
            frames: self.frames.iter().zip(&other.frames).map(|(a, b)| a.sub(b)).collect(),
        })
    }

    /// Largest absolute entry over all frames.
    pub fn max_abs(&self) -> f64 {
        self.frames.iter().fold(0.0, |m, f| m.max(f.max_abs()))
    }

    /// `max |self − other| / max |other|` over all frames and entries.
    pub fn relative_distance(&self, other: &DataSet) -> Result<f64> {
        let diff = self.difference(other)?.max_abs();
        let scale = other.max_abs();
        Ok(if scale == 0.0 { diff } else { diff / scale })
    }

    pub fn check_compatible(&self, other: &DataSet) -> Result<()> {
        if self.m != other.m || self.two_n() != other.two_n() {
            return Err(Error::ShapeMismatch(format!(
                "data sets differ in shape: m {} vs {}, frames {} vs {}",
                self.m,
                other.m,
                self.two_n(),
                other.two_n()
            )));
        }
        if (self.tau - other.tau).abs() > 1e-12 * self.tau {
            return Err(Error::ShapeMismatch(format!("sampling intervals differ: {} vs {}", self.tau, other.tau)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_frames() {
        assert!(DataSet::scalar(1.0, &[1.0, 0.5]).is_ok());
        assert!(DataSet::scalar(1.0, &[1.0, 0.5, 0.2]).is_err());
        assert!(DataSet::scalar(0.0, &[1.0, 0.5]).is_err());
        let bad = DenseMatrix::from_rows(&[&[1.0, 0.5], &[0.4, 1.0]]);
        assert!(matches!(DataSet::new(1.0, vec![bad.clone(), bad]), Err(Error::NonSymmetric { .. })));
        let ragged = vec![DenseMatrix::identity(2), DenseMatrix::identity(3)];
        assert!(matches!(DataSet::new(1.0, ragged), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn distances() {
        let a = DataSet::scalar(1.0, &[2.0, 1.0]).unwrap();
        let b = DataSet::scalar(1.0, &[2.0, 1.5]).unwrap();
        assert_eq!(a.relative_distance(&b).unwrap(), 0.25);
        assert_eq!(a.difference(&b).unwrap().scalar_values(), vec![0.0, -0.5]);
        let c = DataSet::scalar(0.5, &[2.0, 1.0]).unwrap();
        assert!(a.difference(&c).is_err());
    }
}
