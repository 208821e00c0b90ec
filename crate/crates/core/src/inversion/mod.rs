//! Inversion on top of the ROM and the DtB transform: impedance estimates
//! from the scalar ROM coefficients, and reverse-time-migration images with
//! the metrics used to compare them.

mod eikonal;
mod impedance;
mod metrics;
mod rtm;

pub use eikonal::{fast_marching, travel_times, TravelTimeMethod};
pub use impedance::{impedance_estimates, mimo_impedance_report, ImpedanceEstimate, MatrixImpedance};
pub use metrics::{count_envelope_peaks, dilate, envelope, off_mask_energy_fraction, peak_distance};
pub use rtm::{rtm_image, Image};
