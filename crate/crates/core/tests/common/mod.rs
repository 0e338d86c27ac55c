#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

/// Independent normal stream for oracles; deliberately a different generator
/// from the library's replicate streams.
pub fn normals(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Plain AR(1) recursion with `y_1 = sigma * e_1`.
pub fn ar1_path(phi: f64, sigma: f64, eps: &[f64]) -> Vec<f64> {
    let mut y = Vec::with_capacity(eps.len());
    let mut prev = 0.0;
    for &e in eps {
        prev = phi * prev + sigma * e;
        y.push(prev);
    }
    y
}

/// Textbook least-squares slope through the origin with `y_0 = 0`.
pub fn naive_phi_hat(y: &[f64]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for t in 1..y.len() {
        num += y[t - 1] * y[t];
        den += y[t - 1] * y[t - 1];
    }
    num / den
}

/// `erf` by its Maclaurin series; accurate to ~1e-15 for |x| < 3.
pub fn erf_series(x: f64) -> f64 {
    let mut term = x;
    let mut sum = x;
    let x2 = x * x;
    for k in 1..200 {
        term *= -x2 / k as f64;
        let add = term / (2 * k + 1) as f64;
        sum += add;
        if add.abs() < 1e-18 {
            break;
        }
    }
    2.0 / std::f64::consts::PI.sqrt() * sum
}

pub fn phi_series(x: f64) -> f64 {
    0.5 * (1.0 + erf_series(x / std::f64::consts::SQRT_2))
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
