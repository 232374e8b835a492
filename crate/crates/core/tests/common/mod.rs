#![allow(dead_code)]

use cmcca::ingest::{standardize, LabeledMatrix, PairedDataset, DEFAULT_VARIANCE_FLOOR};
use cmcca::rng::{stream, Purpose};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

pub fn gaussian(seed: u64, n: usize, p: usize) -> DMatrix<f64> {
    let mut rng = stream(seed, Purpose::Design, 0);
    DMatrix::from_fn(n, p, |_, _| rng.sample(StandardNormal))
}

pub fn labeled(m: DMatrix<f64>, prefix: &str) -> LabeledMatrix {
    let ids = (0..m.nrows()).map(|i| format!("s{i}")).collect();
    let names = (0..m.ncols()).map(|j| format!("{prefix}{j}")).collect();
    LabeledMatrix::new(m, ids, names).unwrap()
}

pub fn standardized_pair(x: DMatrix<f64>, y: DMatrix<f64>) -> PairedDataset {
    let x = standardize(&labeled(x, "x"), DEFAULT_VARIANCE_FLOOR).unwrap().matrix;
    let y = standardize(&labeled(y, "y"), DEFAULT_VARIANCE_FLOOR).unwrap().matrix;
    PairedDataset::new(x, y).unwrap()
}

/// `y` with `shared` columns correlated with the first columns of `x`.
pub fn correlated_pair(seed: u64, n: usize, p: usize, q: usize) -> PairedDataset {
    let x = gaussian(seed, n, p);
    let mut y = gaussian(seed + 1_000_000, n, q);
    for j in 0..q.min(p).min(3) {
        let w = 1.0 - 0.3 * j as f64;
        for i in 0..n {
            y[(i, j)] += w * x[(i, j)];
        }
    }
    standardized_pair(x, y)
}
