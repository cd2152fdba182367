//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use catcma::bernoulli::natural_gradient;
use catcma::treatments::{wrap_objective, AffineMap};
use catcma::{Objective, ProblemInstance};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn all_binary(m: usize) -> impl Iterator<Item = Vec<bool>> {
    (0u32..1 << m).map(move |bits| (0..m).map(|j| bits >> j & 1 == 1).collect())
}

/// Population of `lambda` random binary vectors with a random ranking,
/// turned into a natural-gradient estimate with truncated linear weights.
pub fn random_gradient(rng: &mut ChaCha8Rng, q: &[f64], lambda: usize) -> Vec<f64> {
    let samples: Vec<Vec<bool>> = (0..lambda)
        .map(|_| q.iter().map(|&qi| rng.random::<f64>() < qi).collect())
        .collect();
    let mut ranks: Vec<usize> = (1..=lambda).collect();
    for i in (1..lambda).rev() {
        ranks.swap(i, rng.random_range(0..=i));
    }
    let mu = lambda / 2;
    let raw: Vec<f64> = (1..=mu).map(|i| (mu + 1 - i) as f64).collect();
    let total: f64 = raw.iter().sum();
    let mut weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    weights.resize(lambda, 0.0);
    let refs: Vec<&[bool]> = samples.iter().map(Vec::as_slice).collect();
    natural_gradient(q, &refs, &ranks, &weights).unwrap()
}

/// Random positive-definite quadratic `(x - x*)^T H (x - x*)` with condition
/// number up to 1e3.
pub fn random_quadratic(rng: &mut ChaCha8Rng, n: usize) -> impl Fn(&DVector<f64>) -> f64 {
    let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let q = a.qr().q();
    let eig = DVector::from_fn(n, |i, _| 10f64.powf(3.0 * i as f64 / (n - 1).max(1) as f64));
    let h = &q * DMatrix::from_diagonal(&eig) * q.transpose();
    let opt = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
    move |x| {
        let d = x - &opt;
        d.dot(&(&h * &d))
    }
}

pub fn hr_value(instance: &ProblemInstance, c: &[bool], v: &DMatrix<f64>, b: &DVector<f64>) -> f64 {
    let w = AffineMap::new(v.clone(), b.clone()).unwrap().pack();
    wrap_objective(instance, instance.n, instance.m).evaluate(c, &w)
}

/// Central differences (step 1e-6) of the wrapped objective with respect to `(V, b)`.
pub fn finite_difference(
    instance: &ProblemInstance,
    c: &[bool],
    v: &DMatrix<f64>,
    b: &DVector<f64>,
) -> (DMatrix<f64>, DVector<f64>) {
    let h = 1e-6;
    let mut dv = DMatrix::zeros(v.nrows(), v.ncols());
    for i in 0..v.nrows() {
        for j in 0..v.ncols() {
            let (mut up, mut down) = (v.clone(), v.clone());
            up[(i, j)] += h;
            down[(i, j)] -= h;
            dv[(i, j)] = (hr_value(instance, c, &up, b) - hr_value(instance, c, &down, b)) / (2.0 * h);
        }
    }
    let mut db = DVector::zeros(b.len());
    for i in 0..b.len() {
        let (mut up, mut down) = (b.clone(), b.clone());
        up[i] += h;
        down[i] -= h;
        db[i] = (hr_value(instance, c, v, &up) - hr_value(instance, c, v, &down)) / (2.0 * h);
    }
    (dv, db)
}

/// Largest deviation relative to the larger of 1e-3 and the biggest entry of `want`.
pub fn relative_error(got: &[f64], want: &[f64]) -> f64 {
    let scale = want.iter().fold(1e-3f64, |a, w| a.max(w.abs()));
    got.iter().zip(want).map(|(g, w)| (g - w).abs() / scale).fold(0.0, f64::max)
}
