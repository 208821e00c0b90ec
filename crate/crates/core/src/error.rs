use std::fmt;

/// Failures raised by the numerical kernels and the ROM pipeline.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A Cholesky pivot (or block pivot) was not positive. `index` is the
    /// zero-based row or block at which the factorization broke down.
    NotPositiveDefinite { context: &'static str, index: usize, pivot: f64 },
    /// Input expected to be symmetric deviates beyond the relative tolerance.
    NonSymmetric { asymmetry: f64 },
    /// Smallest singular value below the configured floor.
    Singular { smallest: f64, floor: f64 },
    /// A scalar function was undefined or non-finite on the spectrum.
    Domain(String),
    /// Shapes of two operands do not agree.
    ShapeMismatch(String),
    /// The ROM propagator is not a contraction.
    NonContractive { spectral_radius: f64 },
    /// Not enough data frames for the requested ROM order.
    InsufficientFrames { required: usize, available: usize },
    /// Medium fields are invalid (non-positive, wrong length, ...).
    InvalidMedium(String),
    /// Requested sensors coincide or are not on the accessible boundary.
    DegenerateSensors(String),
    /// Time step violates the stability bound.
    CflViolation { ratio: f64, limit: f64 },
    /// A coefficient expected to be positive was not.
    NonPositive { what: &'static str, index: usize, value: f64 },
    /// Iterative kernel did not converge.
    NoConvergence(&'static str),
    /// Generic argument validation failure.
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for failures that signal inadmissible data or numerics rather
    /// than malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotPositiveDefinite { .. }
                | Error::Singular { .. }
                | Error::NonContractive { .. }
                | Error::NonPositive { .. }
                | Error::NoConvergence(_)
                | Error::Domain(_)
        )
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NotPositiveDefinite { context, index, pivot } => write!(
                f,
                "{context}: matrix not positive definite at index {index} (pivot {pivot:e}); \
                 data may be inconsistent, noisy, or sampled too coarsely"
            ),
            Error::NonSymmetric { asymmetry } => {
                write!(f, "matrix is not symmetric (relative asymmetry {asymmetry:e})")
            }
            Error::Singular { smallest, floor } => {
                write!(f, "matrix is numerically singular (smallest singular value {smallest:e} < floor {floor:e})")
            }
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::ShapeMismatch(msg) => write!(f, "shape mismatch: {msg}"),
            Error::NonContractive { spectral_radius } => {
                write!(f, "ROM propagator is not a contraction (spectral radius {spectral_radius})")
            }
            Error::InsufficientFrames { required, available } => {
                write!(f, "need at least {required} data frames, got {available}")
            }
            Error::InvalidMedium(msg) => write!(f, "invalid medium: {msg}"),
            Error::DegenerateSensors(msg) => write!(f, "degenerate sensors: {msg}"),
            Error::CflViolation { ratio, limit } => {
                write!(f, "time step violates CFL bound ({ratio} > {limit})")
            }
            Error::NonPositive { what, index, value } => {
                write!(f, "{what} at index {index} is not positive ({value:e})")
            }
            Error::NoConvergence(what) => write!(f, "{what} did not converge"),
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
        }
    }
}

impl std::error::Error for Error {}
