#![allow(dead_code)]

use neff::glm::{fit, IrlsOptions};
use neff::{Family, FittedModel, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Bernoulli, Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Intercept column followed by `p - 1` standard normal covariates.
pub fn random_design(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Matrix {
    Matrix::from_fn(n, p, |_, j| if j == 0 { 1.0 } else { normal(rng) })
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| normal(rng)).collect()
}

pub fn logistic_outcome(rng: &mut ChaCha8Rng, x: &Matrix, beta: &[f64]) -> Vec<f64> {
    x.row_iter()
        .map(|r| {
            let p = Family::Binomial.inverse_link(neff::linalg::dot(r, beta));
            Bernoulli::new(p).unwrap().sample(rng) as u8 as f64
        })
        .collect()
}

/// A gaussian design whose second column is a binary indicator with exactly `m` ones.
pub fn design_with_rare_indicator(rng: &mut ChaCha8Rng, n: usize, m: usize, extra: usize) -> Matrix {
    let mut flags = vec![0.0; n];
    let mut placed = 0;
    while placed < m {
        let i = rng.random_range(0..n);
        if flags[i] == 0.0 {
            flags[i] = 1.0;
            placed += 1;
        }
    }
    Matrix::from_fn(n, 2 + extra, |i, j| match j {
        0 => 1.0,
        1 => flags[i],
        _ => normal(rng),
    })
}

/// X T for a well-conditioned random T.
pub fn random_transform(rng: &mut ChaCha8Rng, p: usize) -> Matrix {
    Matrix::from_fn(p, p, |i, j| {
        let off = 0.1 * normal(rng);
        if i == j {
            1.0 + rng.random_range(0.5..3.0)
        } else {
            off
        }
    })
}

pub fn fit_default(x: &Matrix, y: &[f64], family: Family) -> FittedModel {
    fit(x, y, family, &IrlsOptions::default()).unwrap()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
