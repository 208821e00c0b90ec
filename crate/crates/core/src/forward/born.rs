use super::data::DataSet;
use super::medium::{Medium, Pulse};
use super::{simulate, Solver};
use crate::error::{Error, Result};

/// Default central-difference step for the Born oracle.
pub const DEFAULT_FD_STEP: f64 = 1e-3;

/// Born data by central differences in `ε` of the data for
/// `q^ε = q⁰ + ε(q − q⁰)`: `D⁰ + [D^{+h} − D^{−h}]/(2h)`.
pub fn born_oracle(
    reference: &Medium,
    perturbed: &Medium,
    pulse: &Pulse,
    tau: f64,
    two_n: usize,
    fd_step: f64,
) -> Result<DataSet> {
    if !(fd_step > 0.0 && fd_step <= 0.1) {
        return Err(Error::InvalidArgument(format!("finite-difference step must lie in (0, 0.1], got {fd_step}")));
    }
    let d0 = simulate(reference, pulse, tau, two_n, Solver::Spectral)?;
    let derivative = derivative(reference, perturbed, pulse, tau, two_n, fd_step)?;
    combine(&d0, &derivative)
}

/// Born data together with the relative change of the derivative when the
/// step is halved (a Richardson-style consistency check).
pub fn born_oracle_checked(
    reference: &Medium,
    perturbed: &Medium,
    pulse: &Pulse,
    tau: f64,
    two_n: usize,
    fd_step: f64,
) -> Result<(DataSet, f64)> {
    let d0 = simulate(reference, pulse, tau, two_n, Solver::Spectral)?;
    let coarse = derivative(reference, perturbed, pulse, tau, two_n, fd_step)?;
    let fine = derivative(reference, perturbed, pulse, tau, two_n, 0.5 * fd_step)?;
    let change = coarse.relative_distance(&fine)?;
    Ok((combine(&d0, &coarse)?, change))
}

fn derivative(
    reference: &Medium,
    perturbed: &Medium,
    pulse: &Pulse,
    tau: f64,
    two_n: usize,
    step: f64,
) -> Result<DataSet> {
    let plus = simulate(&reference.log_interpolate(perturbed, step)?, pulse, tau, two_n, Solver::Spectral)?;
    let minus = simulate(&reference.log_interpolate(perturbed, -step)?, pulse, tau, two_n, Solver::Spectral)?;
    Ok(plus.difference(&minus)?.scaled(0.5 / step))
}

fn combine(d0: &DataSet, derivative: &DataSet) -> Result<DataSet> {
    let frames = d0.frames().iter().zip(derivative.frames()).map(|(a, b)| a.add(b)).collect();
    DataSet::new(d0.tau(), frames)
}
