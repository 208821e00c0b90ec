//! Fine-grid forward modelling: media, discretized operators, sensor vectors,
//! spectral and time-domain data synthesis, and a finite-difference Born
//! oracle.

mod born;
mod data;
mod fdtd;
mod grid;
mod medium;
mod spectral;

pub use born::{born_oracle, born_oracle_checked, DEFAULT_FD_STEP};
pub use data::{DataSet, FRAME_SYMMETRY_TOL};
pub use fdtd::{check_cfl, synthesize_fdtd, DEFAULT_SUBSTEPS};
pub use grid::{
    acoustic_operator_2d, build_lq_1d, build_lq_2d, similarity_2d, symmetric_operator_2d, FineModel, LowerBidiagonal,
};
pub use medium::{Medium, Medium1D, Medium2D, Pulse};
pub use spectral::{cos_sqrt, sensor_vectors, snapshots, synthesize_dense, synthesize_spectral, Propagator};

use crate::error::Result;

/// Choice of data synthesizer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Solver {
    Spectral,
    Fdtd { substeps: usize },
}

/// Simulates `two_n` data frames for `medium` with the chosen solver.
pub fn simulate(medium: &Medium, pulse: &Pulse, tau: f64, two_n: usize, solver: Solver) -> Result<DataSet> {
    let model = FineModel::new(medium)?;
    match solver {
        Solver::Spectral => {
            let b = sensor_vectors(model.operator(), model.deltas(), pulse)?;
            synthesize_spectral(model.operator(), &b, tau, two_n)
        }
        Solver::Fdtd { substeps } => synthesize_fdtd(&model, pulse, tau, two_n, substeps),
    }
}
