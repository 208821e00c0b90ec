use rayon::prelude::*;

use super::eikonal::{travel_times, TravelTimeMethod};
use crate::error::{Error, Result};
use crate::forward::{check_cfl, DataSet, FineModel, Medium2D};

/// Leapfrog steps per sampling interval in the backpropagation.
const SUBSTEPS: usize = 16;

/// Image on the node grid of a 2D medium, row-major like the medium fields.
#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
}

impl Image {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }
}

/// Band-limited reconstruction of an even trace from its samples `d_k = d(kτ)`.
fn sinc_interpolate(samples: &[f64], tau: f64, t: f64) -> f64 {
    let k = samples.len() as isize;
    let mut acc = 0.0;
    for j in -(k - 1)..k {
        let x = t / tau - j as f64;
        let s = if x == 0.0 {
            1.0
        } else {
            let px = std::f64::consts::PI * x;
            px.sin() / px
        };
        acc += samples[j.unsigned_abs()] * s;
    }
    acc
}

/// Reverse-time migration of `data` through `medium`: for every source the
/// received traces are time reversed, injected at the receivers, propagated
/// with leapfrog steps, and the field is read at `T − t_s(x)`, where `t_s` is
/// the travel time from the source and `T` the last sample time.
pub fn rtm_image(data: &DataSet, medium: &Medium2D, method: TravelTimeMethod) -> Result<Image> {
    let m = medium.sensors().len();
    if data.m() != m {
        return Err(Error::ShapeMismatch(format!("medium has {m} sensors, data have {}", data.m())));
    }
    let model = FineModel::from_2d(medium)?;
    let tau = data.tau();
    let dt = tau / SUBSTEPS as f64;
    check_cfl(&model, dt)?;

    let images: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|s| {
            let traces: Vec<Vec<f64>> = (0..m).map(|r| data.frames().iter().map(|f| f[(r, s)]).collect()).collect();
            let times = travel_times(medium, medium.sensors()[s], method);
            backpropagate(&model, &traces, &times, tau, dt)
        })
        .collect();

    let n = medium.nx() * medium.ny();
    let mut values = vec![0.0; n];
    for image in &images {
        for (v, w) in values.iter_mut().zip(image) {
            *v += w;
        }
    }
    Ok(Image { nx: medium.nx(), ny: medium.ny(), values })
}

fn backpropagate(model: &FineModel, traces: &[Vec<f64>], times: &[f64], tau: f64, dt: f64) -> Vec<f64> {
    let n = model.n();
    let op = model.operator();
    let deltas = model.deltas();
    let nodes = model.sensor_nodes();
    let frames = traces.first().map_or(0, |t| t.len());
    let mut image = vec![0.0; n];
    if frames == 0 || traces.iter().all(|t| t.iter().all(|&v| v == 0.0)) {
        return image;
    }
    let total = (frames - 1) as f64 * tau;
    let steps = (frames - 1) * SUBSTEPS;

    let mut order: Vec<usize> = (0..n).filter(|&i| times[i] <= total).collect();
    order.sort_by(|&a, &b| (total - times[a]).total_cmp(&(total - times[b])).then(a.cmp(&b)));
    let mut next_node = 0;

    let mut prev = vec![0.0; n];
    let mut cur = vec![0.0; n];
    let dt2 = dt * dt;
    while next_node < order.len() && total - times[order[next_node]] <= 0.0 {
        next_node += 1;
    }
    for step in 0..steps {
        let t = step as f64 * dt;
        let sw = op.matvec(&cur);
        let mut next: Vec<f64> = (0..n).map(|i| 2.0 * cur[i] - prev[i] - dt2 * sw[i]).collect();
        for (r, trace) in traces.iter().enumerate() {
            let f = sinc_interpolate(trace, tau, total - t);
            next[nodes[r]] += dt2 * f * deltas[(nodes[r], r)];
        }
        let t_next = t + dt;
        while next_node < order.len() {
            let node = order[next_node];
            let target = total - times[node];
            if target > t_next && step + 1 < steps {
                break;
            }
            let theta = ((target - t) / dt).clamp(0.0, 1.0);
            image[node] = (1.0 - theta) * cur[node] + theta * next[node];
            next_node += 1;
        }
        prev = std::mem::replace(&mut cur, next);
    }
    image
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{simulate, Pulse, Solver};

    fn medium_with(nx: usize, ny: usize, sensors: Vec<usize>, scatterer: Option<(usize, usize)>) -> Medium2D {
        let mut sigma = vec![1.0; nx * ny];
        if let Some((i, j)) = scatterer {
            for jj in j - 1..=j + 1 {
                for ii in i - 1..=i + 1 {
                    sigma[jj * nx + ii] = 3.0;
                }
            }
        }
        Medium2D::new(nx, ny, 1.0, sigma, vec![1.0; nx * ny], sensors).unwrap()
    }

    #[test]
    fn sinc_reconstruction_hits_samples() {
        let s = [1.0, 0.5, -0.25, 0.0];
        for (k, &v) in s.iter().enumerate() {
            assert!((sinc_interpolate(&s, 2.0, 2.0 * k as f64) - v).abs() < 1e-14);
        }
        assert!((sinc_interpolate(&s, 2.0, -2.0) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn zero_data_give_zero_image() {
        let medium = medium_with(20, 16, vec![5, 10, 15], None);
        let data = DataSet::new(2.0, vec![crate::linalg::DenseMatrix::zeros(3, 3); 8]).unwrap();
        let image = rtm_image(&data, &medium, TravelTimeMethod::Auto).unwrap();
        assert_eq!(image.max_abs(), 0.0);
    }

    #[test]
    fn point_reflector_is_localized() {
        let (nx, ny) = (50, 40);
        let sensors: Vec<usize> = (5..46).step_by(5).collect();
        let pulse = Pulse::new(0.6, 0.3).unwrap().unit_dc();
        let reference = medium_with(nx, ny, sensors.clone(), None);
        let true_medium = medium_with(nx, ny, sensors, Some((24, 18)));
        let tau = 2.0;
        let d = simulate(&true_medium.into(), &pulse, tau, 40, Solver::Spectral).unwrap();
        let d0 = simulate(&reference.clone().into(), &pulse, tau, 40, Solver::Spectral).unwrap();
        let image = rtm_image(&d.difference(&d0).unwrap(), &reference, TravelTimeMethod::Auto).unwrap();
        let mut support = vec![false; nx * ny];
        support[18 * nx + 24] = true;
        let region: Vec<bool> = (0..nx * ny).map(|k| k / nx >= 4).collect();
        let dist = super::super::peak_distance(&image, &support, Some(&region));
        assert!(dist <= 2.0, "peak {dist} cells from the reflector");
    }

    #[test]
    fn image_is_linear_in_the_data() {
        let medium = medium_with(24, 18, vec![6, 12, 18], None);
        let pulse = Pulse::new(0.6, 0.3).unwrap();
        let a =
            simulate(&medium_with(24, 18, vec![6, 12, 18], Some((10, 8))).into(), &pulse, 2.0, 10, Solver::Spectral)
                .unwrap();
        let b = simulate(&medium.clone().into(), &pulse, 2.0, 10, Solver::Spectral).unwrap();
        let sum = DataSet::new(2.0, a.frames().iter().zip(b.frames()).map(|(x, y)| x.add(y)).collect()).unwrap();
        let ia = rtm_image(&a, &medium, TravelTimeMethod::Auto).unwrap();
        let ib = rtm_image(&b, &medium, TravelTimeMethod::Auto).unwrap();
        let is = rtm_image(&sum, &medium, TravelTimeMethod::Auto).unwrap();
        let scale = is.max_abs();
        for k in 0..is.values.len() {
            assert!((is.values[k] - ia.values[k] - ib.values[k]).abs() <= 1e-12 * scale);
        }
    }
}
