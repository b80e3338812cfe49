//! Fixed reference values. The D2 constants were computed once by Newton's
//! method on the exact log-likelihood at 50 significant digits and are frozen here.

use approx::assert_relative_eq;
use neff::linalg::dot;
use neff::{fit_irls, neff_glm, spd_inverse, Family, FittedModel, Matrix};

const D2_X: [f64; 8] = [-3.0, -2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 3.0];
const D2_Y: [f64; 8] = [0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 1.0];

const D2_BETA1: f64 = 1.441_745_570_951_048_4;
const D2_VAR0: f64 = 1.141_850_030_025_412_9;
const D2_VAR1: f64 = 0.949_873_890_529_226_5;
const D2_DEVIANCE: f64 = 5.588_207_782_424_875;
const D2_NEFF: [(f64, f64); 4] = [
    (0.0, 3.503_087_003_387_806),
    (1.0, 3.090_553_326_237_024_3),
    (3.0, 8.007_317_557_517_977),
    (10.0, 18_991.813_150_121_8),
];

fn d2() -> (Matrix, FittedModel) {
    let x = Matrix::from_fn(8, 2, |i, j| if j == 0 { 1.0 } else { D2_X[i] });
    let m = fit_irls(&x, &D2_Y, Family::Binomial).unwrap();
    (x, m)
}

fn log_likelihood(x: &Matrix, y: &[f64], beta: &[f64]) -> f64 {
    x.row_iter()
        .zip(y)
        .map(|(r, &yi)| {
            let eta = dot(r, beta);
            yi * eta - eta.exp().ln_1p()
        })
        .sum()
}

#[test]
fn d2_coefficients_and_covariance() {
    let (_, m) = d2();
    assert!(m.beta[0].abs() < 1e-12);
    assert_relative_eq!(m.beta[1], D2_BETA1, max_relative = 1e-10);
    assert_relative_eq!(m.cov_beta[(0, 0)], D2_VAR0, max_relative = 1e-9);
    assert_relative_eq!(m.cov_beta[(1, 1)], D2_VAR1, max_relative = 1e-9);
    assert!(m.cov_beta[(0, 1)].abs() < 1e-12);
    assert_relative_eq!(m.deviance, D2_DEVIANCE, max_relative = 1e-12);
    assert_eq!(m.dispersion, 1.0);
}

#[test]
fn d2_effective_sample_sizes() {
    let (_, m) = d2();
    for (x, want) in D2_NEFF {
        let p = neff_glm(&m, &[1.0, x]).unwrap();
        assert_relative_eq!(p.n_eff, want, max_relative = 1e-8);
    }
    let far = neff_glm(&m, &[1.0, 10.0]).unwrap();
    assert!(far.annotations.contains(&neff::Annotation::ExceedsDevN));
}

#[test]
fn d2_matches_plain_newton() {
    // Newton on the log-likelihood with no halving, no weight floor
    let (x, m) = d2();
    let mut beta = [0.0, 0.0];
    for _ in 0..50 {
        let mut g = [0.0; 2];
        let mut h = [[0.0; 2]; 2];
        for (r, &yi) in x.row_iter().zip(&D2_Y) {
            let mu = 1.0 / (1.0 + (-dot(r, &beta)).exp());
            let w = mu * (1.0 - mu);
            for a in 0..2 {
                g[a] += r[a] * (yi - mu);
                for b in 0..2 {
                    h[a][b] += w * r[a] * r[b];
                }
            }
        }
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        beta[0] += (h[1][1] * g[0] - h[0][1] * g[1]) / det;
        beta[1] += (h[0][0] * g[1] - h[1][0] * g[0]) / det;
    }
    assert!((m.beta[0] - beta[0]).abs() < 1e-12);
    assert_relative_eq!(m.beta[1], beta[1], max_relative = 1e-12);
}

#[test]
fn covariance_is_inverse_observed_information() {
    let (x, m) = d2();
    let h = 1e-5;
    let f = |b: &[f64]| log_likelihood(&x, &D2_Y, b);
    let mut hess = Matrix::zeros(2, 2);
    for a in 0..2 {
        for b in 0..2 {
            let at = |da: f64, db: f64| {
                let mut beta = m.beta.clone();
                beta[a] += da;
                beta[b] += db;
                f(&beta)
            };
            let v = (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4.0 * h * h);
            hess[(a, b)] = -v;
        }
    }
    let sym = Matrix::from_fn(2, 2, |i, j| 0.5 * (hess[(i, j)] + hess[(j, i)]));
    let inv = spd_inverse(&sym).unwrap();
    for i in 0..2 {
        for j in 0..2 {
            let scale = m.cov_beta[(i, i)].max(m.cov_beta[(j, j)]);
            assert!(
                (inv[(i, j)] - m.cov_beta[(i, j)]).abs() <= 1e-4 * scale,
                "[{i},{j}] {} vs {}",
                inv[(i, j)],
                m.cov_beta[(i, j)]
            );
        }
    }
}

#[test]
fn poisson_intercept_only_neff_is_n() {
    // Var(Y) = mu and Var(eta_hat) = 1/(n mu), so n_eff = n exactly
    let y: Vec<f64> = (0..40).map(|i| (i % 5) as f64).collect();
    let x = Matrix::from_fn(40, 1, |_, _| 1.0);
    let m = fit_irls(&x, &y, Family::Poisson).unwrap();
    assert_relative_eq!(m.beta[0], 2.0_f64.ln(), max_relative = 1e-12);
    assert_relative_eq!(neff_glm(&m, &[1.0]).unwrap().n_eff, 40.0, max_relative = 1e-10);
}
