use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::forward::Medium2D;

/// How one-way travel times from a sensor are computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TravelTimeMethod {
    /// Straight rays when the speed is constant, fast marching otherwise.
    #[default]
    Auto,
    /// Distance divided by the (constant) speed at the sensor.
    Analytic,
    FastMarching,
}

/// Travel times from the sensor in column `sensor` of row 0 to every node.
pub fn travel_times(medium: &Medium2D, sensor: usize, method: TravelTimeMethod) -> Vec<f64> {
    let constant = medium.c().iter().all(|&c| c == medium.c()[0]);
    match method {
        TravelTimeMethod::Analytic => analytic(medium, sensor),
        TravelTimeMethod::Auto if constant => analytic(medium, sensor),
        _ => fast_marching(medium, sensor),
    }
}

fn analytic(medium: &Medium2D, sensor: usize) -> Vec<f64> {
    let c = medium.c()[medium.index(sensor, 0)];
    let (xs, zs) = medium.position(sensor, 0);
    let mut out = Vec::with_capacity(medium.nx() * medium.ny());
    for j in 0..medium.ny() {
        for i in 0..medium.nx() {
            let (x, z) = medium.position(i, j);
            out.push(((x - xs).powi(2) + (z - zs).powi(2)).sqrt() / c);
        }
    }
    out
}

#[derive(Clone, Copy, PartialEq)]
struct Trial {
    time: f64,
    node: usize,
}

impl Eq for Trial {}

impl Ord for Trial {
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Trial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Radius in cells around the source where straight-ray times seed the march.
const SEED_RADIUS: usize = 3;

/// First-order fast marching solution of `|∇T| = 1/c` on the node grid.
pub fn fast_marching(medium: &Medium2D, sensor: usize) -> Vec<f64> {
    let (nx, ny, h) = (medium.nx(), medium.ny(), medium.h());
    let mut time = vec![f64::INFINITY; nx * ny];
    let mut done = vec![false; nx * ny];
    let mut heap = BinaryHeap::new();
    let c0 = medium.c()[medium.index(sensor, 0)];
    for j in 0..SEED_RADIUS.min(ny) {
        for i in sensor.saturating_sub(SEED_RADIUS)..(sensor + SEED_RADIUS + 1).min(nx) {
            let d = ((i as f64 - sensor as f64).powi(2) + (j as f64).powi(2)).sqrt();
            if d <= SEED_RADIUS as f64 {
                let node = medium.index(i, j);
                time[node] = d * h / c0;
                heap.push(Trial { time: time[node], node });
            }
        }
    }
    while let Some(Trial { time: t, node }) = heap.pop() {
        if done[node] || t > time[node] {
            continue;
        }
        done[node] = true;
        let (i, j) = (node % nx, node / nx);
        let mut neighbours = Vec::with_capacity(4);
        if i > 0 {
            neighbours.push(node - 1);
        }
        if i + 1 < nx {
            neighbours.push(node + 1);
        }
        if j > 0 {
            neighbours.push(node - nx);
        }
        if j + 1 < ny {
            neighbours.push(node + nx);
        }
        for nb in neighbours {
            if done[nb] {
                continue;
            }
            let candidate = local_update(&time, &done, nb, nx, ny, h / medium.c()[nb]);
            if candidate < time[nb] {
                time[nb] = candidate;
                heap.push(Trial { time: candidate, node: nb });
            }
        }
    }
    time
}

fn local_update(time: &[f64], done: &[bool], node: usize, nx: usize, ny: usize, step: f64) -> f64 {
    let (i, j) = (node % nx, node / nx);
    let known = |k: usize| if done[k] { time[k] } else { f64::INFINITY };
    let mut a = f64::INFINITY;
    if i > 0 {
        a = a.min(known(node - 1));
    }
    if i + 1 < nx {
        a = a.min(known(node + 1));
    }
    let mut b = f64::INFINITY;
    if j > 0 {
        b = b.min(known(node - nx));
    }
    if j + 1 < ny {
        b = b.min(known(node + nx));
    }
    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
    if hi.is_infinite() || hi - lo >= step {
        return lo + step;
    }
    0.5 * (lo + hi + (2.0 * step * step - (hi - lo).powi(2)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_marching_tracks_straight_rays() {
        let m = Medium2D::homogeneous(60, 50, 1.0, 2.0, vec![30]).unwrap();
        let fm = fast_marching(&m, 30);
        let exact = travel_times(&m, 30, TravelTimeMethod::Analytic);
        assert_eq!(fm[m.index(30, 0)], 0.0);
        assert!((fm[m.index(30, 40)] - 20.0).abs() < 1e-12);
        for (a, b) in fm.iter().zip(&exact) {
            assert!((a - b).abs() <= 0.1 * b + 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn slow_layer_delays_arrivals() {
        let fast = Medium2D::homogeneous(20, 20, 1.0, 1.0, vec![10]).unwrap();
        let slow = Medium2D::from_fn(20, 20, 1.0, vec![10], |_, z| (1.0, if z > 5.0 { 0.5 } else { 1.0 })).unwrap();
        let a = travel_times(&fast, 10, TravelTimeMethod::Auto);
        let b = travel_times(&slow, 10, TravelTimeMethod::Auto);
        let deep = fast.index(10, 15);
        assert!((a[deep] - 15.0).abs() < 1e-12);
        assert!(b[deep] > 24.0);
    }
}
