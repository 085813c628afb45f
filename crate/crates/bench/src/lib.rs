//! Deterministic synthetic inputs for the benchmarks.

use xbar_core::rng::splitmix64;
use xbar_core::{LabeledDataset, Matrix, Split};

/// Values in [0, 1) from a splitmix64 counter stream.
pub fn unit_values(n: usize, seed: u64) -> Vec<f64> {
    (0..n as u64)
        .map(|i| (splitmix64(seed.wrapping_add(i)) >> 11) as f64 / (1u64 << 53) as f64)
        .collect()
}

/// Matrix with entries in [-scale, scale).
pub fn signed_matrix(rows: usize, cols: usize, scale: f64, seed: u64) -> Matrix {
    let data = unit_values(rows * cols, seed)
        .into_iter()
        .map(|v| (2.0 * v - 1.0) * scale)
        .collect();
    Matrix::from_vec(rows, cols, data).expect("shape matches")
}

/// MNIST-shaped random dataset.
pub fn synthetic_dataset(samples: usize, dim: usize, classes: usize, seed: u64) -> LabeledDataset {
    let inputs = Matrix::from_vec(samples, dim, unit_values(samples * dim, seed)).expect("shape matches");
    let labels = (0..samples as u64)
        .map(|i| (splitmix64(seed ^ i) % classes as u64) as usize)
        .collect();
    LabeledDataset::new(inputs, labels, classes, Split::Train).expect("valid dataset")
}
