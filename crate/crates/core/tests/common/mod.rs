#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use ridge_sketch_core::{generate_problem, DenseMatrix, GeneratedProblem, GeneratorSpec, Spectrum};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn randn(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn randn_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn rel_err(x: &[f64], y: &[f64]) -> f64 {
    let d: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    norm(&d) / norm(y).max(f64::MIN_POSITIVE)
}

/// Textbook triple loop `A·B`.
pub fn naive_matmul(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    assert_eq!(a.cols(), b.rows());
    DenseMatrix::from_fn(a.rows(), b.cols(), |i, j| {
        let mut s = 0.0;
        for k in 0..a.cols() {
            s += a.get(i, k) * b.get(k, j);
        }
        s
    })
}

pub fn log_grid(hi: f64, lo: f64, k: usize) -> Vec<f64> {
    (0..k)
        .map(|i| 10f64.powf(hi.log10() + (lo.log10() - hi.log10()) * i as f64 / (k - 1) as f64))
        .collect()
}

pub fn problem(m: usize, n: usize, smin: f64, seed: u64) -> GeneratedProblem {
    generate_problem(&GeneratorSpec {
        m,
        n,
        spectrum: Spectrum::ExpDecay { max: 1.0, min: smin },
        noise_norm: 1e-3,
        seed,
    })
    .unwrap()
}
