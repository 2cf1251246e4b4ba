#![allow(dead_code)]

use mismatch_exponent::dmc::{DecodingMetric, Dmc, InputDist};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random `nx x ny` channel; with `sparse`, roughly one entry in six is zero
/// (never a whole row).
pub fn random_channel(rng: &mut ChaCha8Rng, nx: usize, ny: usize, sparse: bool) -> Dmc {
    loop {
        if let Ok(ch) = Dmc::from_rows(&random_rows(rng, nx, ny, sparse)) {
            return ch;
        }
    }
}

fn random_rows(rng: &mut ChaCha8Rng, nx: usize, ny: usize, sparse: bool) -> Vec<Vec<f64>> {
    let rows: Vec<Vec<f64>> = (0..nx)
        .map(|_| loop {
            let row: Vec<f64> = (0..ny)
                .map(|_| {
                    if sparse && rng.random_bool(1.0 / 6.0) {
                        0.0
                    } else {
                        rng.random_range(0.02..1.0)
                    }
                })
                .collect();
            let total: f64 = row.iter().sum();
            if total > 0.0 {
                break row.iter().map(|v| v / total).collect();
            }
        })
        .collect();
    rows
}

pub fn random_input(rng: &mut ChaCha8Rng, nx: usize) -> InputDist {
    let p: Vec<f64> = (0..nx).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = p.iter().sum();
    InputDist::new(p.iter().map(|v| v / total).collect()).unwrap()
}

pub fn random_metric(rng: &mut ChaCha8Rng, nx: usize, ny: usize) -> DecodingMetric {
    let u: Vec<f64> = (0..nx * ny).map(|_| rng.random_range(0.01..1.0)).collect();
    DecodingMetric::new("random", nx, ny, u).unwrap()
}

/// `(channel, P_X)` with `|X|` in {2, 4} and `|Y|` in 2..=4.
pub fn random_setting(rng: &mut ChaCha8Rng, sparse: bool) -> (Dmc, InputDist) {
    let nx = if rng.random_bool(0.5) { 2 } else { 4 };
    let ny = rng.random_range(2..=4);
    (random_channel(rng, nx, ny, sparse), random_input(rng, nx))
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}
