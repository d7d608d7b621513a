//! Helpers shared by the integration tests.
#![allow(dead_code)]

use lsenet::LseModel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Random LSE model with standard normal exponents scaled by `alpha_scale`
/// and standard normal offsets.
pub fn random_lse(
    rng: &mut ChaCha8Rng,
    terms: usize,
    dim: usize,
    t: f64,
    alpha_scale: f64,
) -> LseModel {
    let rows: Vec<Vec<f64>> = (0..terms)
        .map(|_| (0..dim).map(|_| alpha_scale * gauss(rng)).collect())
        .collect();
    let offsets: Vec<f64> = (0..terms).map(|_| gauss(rng)).collect();
    LseModel::from_rows(t, &rows, &offsets).unwrap()
}

pub fn uniform_point(rng: &mut ChaCha8Rng, dim: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..dim).map(|_| rng.random_range(lo..hi)).collect()
}

/// `|a − b| / |b|`, or the absolute difference when `b` is zero.
pub fn rel_err(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    if b == 0.0 {
        d
    } else {
        d / b.abs()
    }
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Central differences of `f` at `x` with step `h`.
pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|j| {
            let (mut p, mut m) = (x.to_vec(), x.to_vec());
            p[j] += h;
            m[j] -= h;
            (f(&p) - f(&m)) / (2.0 * h)
        })
        .collect()
}
