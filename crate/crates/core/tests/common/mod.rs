#![allow(dead_code)]

use clda::Dataset;
use nalgebra::DMatrix;
use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn to_na(a: ArrayView2<'_, f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

pub fn from_na(m: &DMatrix<f64>) -> Array2<f64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| rng.random_range(-1.0..1.0))
}

pub fn random_spd(rng: &mut ChaCha8Rng, n: usize) -> Array2<f64> {
    let m = random_matrix(rng, n, n);
    let mut s = m.dot(&m.t());
    for i in 0..n {
        s[[i, i]] += 0.5;
    }
    s
}

pub fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> Array2<f64> {
    let m = random_matrix(rng, n, n);
    (&m + &m.t()) * 0.5
}

pub fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> Array2<f64> {
    let qr = to_na(random_matrix(rng, n, n).view()).qr();
    from_na(&qr.q())
}

/// Gaussian-ish clusters with class-dependent shifts; every class has at
/// least two samples.
pub fn random_dataset(rng: &mut ChaCha8Rng, n: usize, per_class: &[usize]) -> Dataset {
    let total: usize = per_class.iter().sum();
    let mut x = Array2::zeros((n, total));
    let mut labels = Vec::with_capacity(total);
    let mut col = 0;
    for (c, &k) in per_class.iter().enumerate() {
        let shift: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        for _ in 0..k {
            for i in 0..n {
                x[[i, col]] = shift[i] + rng.random_range(-1.0..1.0);
            }
            labels.push(c);
            col += 1;
        }
    }
    Dataset::new(x, &labels).unwrap()
}

pub fn frobenius(a: ArrayView2<'_, f64>) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Largest principal angle (radians) between the column spans of `a`, `b`.
pub fn max_principal_angle(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> f64 {
    let qa = to_na(a).qr().q();
    let qb = to_na(b).qr().q();
    let m = qa.transpose() * qb;
    let s = m.svd(false, false).singular_values;
    let smallest = s.iter().copied().fold(f64::INFINITY, f64::min);
    smallest.clamp(-1.0, 1.0).acos()
}
