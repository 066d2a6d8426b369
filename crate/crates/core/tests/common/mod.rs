#![allow(dead_code)]

use lapcert::linalg::{Mat, PsdOperator, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(r: &mut ChaCha8Rng) -> f64 {
    // Box-Muller, kept independent of the crate's own sampler.
    let u1: f64 = r.random::<f64>().max(1e-300);
    let u2: f64 = r.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn gaussian_mat(r: &mut ChaCha8Rng, rows: usize, cols: usize) -> Mat {
    Mat::from_fn(rows, cols, |_, _| normal(r))
}

pub fn gaussian_vec(r: &mut ChaCha8Rng, n: usize) -> Vector {
    Vector::from_fn(n, |_, _| normal(r))
}

/// `AAᵀ/n + ridge·I`.
pub fn random_spd(r: &mut ChaCha8Rng, n: usize, ridge: f64) -> Mat {
    let a = gaussian_mat(r, n, n + 2);
    &a * a.transpose() / n as f64 + Mat::identity(n, n) * ridge
}

pub fn spd_op(r: &mut ChaCha8Rng, n: usize, ridge: f64) -> PsdOperator {
    PsdOperator::new(random_spd(r, n, ridge)).unwrap()
}

pub fn rel_fro(a: &Mat, b: &Mat) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + b.abs())
}

/// Logistic regression with Gaussian design, labels drawn from the model at a Gaussian truth.
pub fn random_logistic(seed: u64, n: usize, p: usize) -> (lapcert::sls::Logistic, Vector) {
    let mut r = rng(seed);
    let x = gaussian_mat(&mut r, n, p);
    let truth = gaussian_vec(&mut r, p);
    let labels = Vector::from_fn(n, |i, _| {
        let eta = x.row(i).transpose().dot(&truth);
        let prob = 1.0 / (1.0 + (-eta).exp());
        if r.random::<f64>() < prob { 1.0 } else { 0.0 }
    });
    (
        lapcert::sls::Logistic::new(x, labels, PsdOperator::identity(p)).unwrap(),
        truth,
    )
}
