#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use stefan1d::{OpenSet1D, StepMeasure};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

fn sorted_points(rng: &mut StdRng, n: usize, lo: f64, hi: f64, min_gap: f64) -> Vec<f64> {
    loop {
        let mut pts: Vec<f64> = (0..n).map(|_| rng.random_range(lo..hi)).collect();
        pts.sort_by(f64::total_cmp);
        if pts.windows(2).all(|w| w[1] - w[0] >= min_gap) {
            return pts;
        }
    }
}

/// One to three disjoint components inside `(-3, 3)`.
pub fn random_open_set(rng: &mut StdRng) -> OpenSet1D {
    let m = rng.random_range(1..=3);
    let pts = sorted_points(rng, 2 * m, -3.0, 3.0, 0.05);
    OpenSet1D::new(pts.chunks(2).map(|p| (p[0], p[1])).collect()).unwrap()
}

/// Step density with values in `[0, 1]` supported in `(c, d)`; some cells
/// are saturated.
pub fn random_density_on(rng: &mut StdRng, c: f64, d: f64) -> StepMeasure {
    if rng.random_bool(0.1) {
        return StepMeasure::zero();
    }
    let cells = rng.random_range(1..=4);
    let len = d - c;
    let breaks = sorted_points(rng, cells + 1, c, d, 1e-3 * len);
    let values = (0..cells)
        .map(|_| if rng.random_bool(0.2) { 1.0 } else { rng.random_range(0.0..1.0) })
        .collect();
    StepMeasure::new(breaks, values).unwrap()
}

pub fn random_instance(rng: &mut StdRng) -> (StepMeasure, OpenSet1D) {
    let o = random_open_set(rng);
    let mu = o
        .components()
        .iter()
        .fold(StepMeasure::zero(), |acc, &(c, d)| acc.add(&random_density_on(rng, c, d)));
    (mu, o)
}

/// Disjoint sorted unit blocks strictly inside `(c, d)`.
pub fn random_blocks(rng: &mut StdRng, count: usize, c: f64, d: f64) -> Vec<(f64, f64)> {
    let pts = sorted_points(rng, 2 * count, c, d, 1e-3 * (d - c));
    pts.chunks(2).map(|p| (p[0], p[1])).collect()
}

/// `(k, β)` strictly inside the window of `(-1, 1)`.
pub fn random_window_point(rng: &mut StdRng) -> (f64, f64) {
    let k = rng.random_range(0.01..1.99);
    let half = k - k * k / 2.0;
    let beta = rng.random_range(-0.999..0.999) * half;
    (k, beta)
}
