//! Linear and generalized linear model fitting.
//!
//! Gaussian models are fitted in closed form through the normal equations.
//! Binomial (logit) and Poisson (log) models use iteratively reweighted least
//! squares with step-halving on deviance increase. Every fit carries the
//! coefficient covariance used downstream for effective sample sizes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::design::DesignSpec;
use crate::error::{Error, Result};
use crate::linalg::{cholesky, dot, weighted_gram, Matrix};
use crate::report::DevelopmentSummary;

/// Working weights below this are clamped.
pub const WEIGHT_FLOOR: f64 = 1e-12;
/// |η̂| beyond this at convergence suggests (quasi-)separation.
pub const SEPARATION_ETA: f64 = 30.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "gaussian-identity")]
    Gaussian,
    #[serde(rename = "binomial-logit")]
    Binomial,
    #[serde(rename = "poisson-log")]
    Poisson,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Gaussian => "gaussian-identity",
            Family::Binomial => "binomial-logit",
            Family::Poisson => "poisson-log",
        }
    }

    /// g⁻¹(η).
    pub fn inverse_link(self, eta: f64) -> f64 {
        match self {
            Family::Gaussian => eta,
            Family::Binomial => {
                if eta >= 0.0 {
                    1.0 / (1.0 + (-eta).exp())
                } else {
                    let e = eta.exp();
                    e / (1.0 + e)
                }
            }
            Family::Poisson => eta.exp(),
        }
    }

    /// g(μ).
    pub fn link(self, mu: f64) -> f64 {
        match self {
            Family::Gaussian => mu,
            Family::Binomial => (mu / (1.0 - mu)).ln(),
            Family::Poisson => mu.ln(),
        }
    }

    /// dg⁻¹/dη.
    pub fn mean_derivative(self, eta: f64) -> f64 {
        match self {
            Family::Gaussian => 1.0,
            Family::Binomial => {
                let e = (-eta.abs()).exp();
                e / ((1.0 + e) * (1.0 + e))
            }
            Family::Poisson => eta.exp(),
        }
    }

    /// Var(Y | μ).
    pub fn variance(self, mu: f64, dispersion: f64) -> f64 {
        match self {
            Family::Gaussian => dispersion,
            Family::Binomial => mu * (1.0 - mu),
            Family::Poisson => mu,
        }
    }

    /// (dg⁻¹/dη)² / Var(Y | η). For the canonical links this equals
    /// dg⁻¹/dη, which stays finite when μ rounds to 0 or 1.
    pub fn working_weight(self, eta: f64, dispersion: f64) -> f64 {
        match self {
            Family::Gaussian => 1.0 / dispersion,
            Family::Binomial | Family::Poisson => self.mean_derivative(eta),
        }
    }

    fn unit_deviance(self, y: f64, eta: f64, mu: f64) -> f64 {
        match self {
            Family::Gaussian => (y - mu) * (y - mu),
            // log μ = −softplus(−η), log(1−μ) = −softplus(η)
            Family::Binomial => 2.0 * (y * softplus(-eta) + (1.0 - y) * softplus(eta)),
            Family::Poisson => {
                let t = if y > 0.0 { y * (y / mu).ln() } else { 0.0 };
                2.0 * (t - (y - mu))
            }
        }
    }

    fn check_outcome(self, y: &[f64]) -> Result<()> {
        for (i, &v) in y.iter().enumerate() {
            let bad = match self {
                _ if !v.is_finite() => Some("not finite"),
                Family::Gaussian => None,
                Family::Binomial if v != 0.0 && v != 1.0 => Some("binomial outcome must be 0 or 1"),
                Family::Poisson if v < 0.0 || v.fract() != 0.0 => Some("poisson outcome must be a nonnegative integer"),
                _ => None,
            };
            if let Some(reason) = bad {
                return Err(Error::InvalidOutcome {
                    row: i + 1,
                    reason: reason.into(),
                });
            }
        }
        Ok(())
    }

    fn start_mean(self, y: &[f64]) -> f64 {
        let m = y.iter().sum::<f64>() / y.len() as f64;
        match self {
            Family::Gaussian => m,
            Family::Binomial => m.clamp(1e-3, 1.0 - 1e-3),
            Family::Poisson => m.max(1e-3),
        }
    }
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" | "gaussian-identity" | "linear" => Ok(Family::Gaussian),
            "binomial" | "binomial-logit" | "logistic" => Ok(Family::Binomial),
            "poisson" | "poisson-log" => Ok(Family::Poisson),
            other => Err(Error::corrupt("family", format!("unknown family `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FitWarning {
    SeparationSuspected { max_abs_eta: f64, floored_weights: usize },
}

impl fmt::Display for FitWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FitWarning::SeparationSuspected {
                max_abs_eta,
                floored_weights,
            } => write!(
                f,
                "separation suspected: max |eta| = {max_abs_eta:.3}, {floored_weights} weight(s) floored"
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FittedModel {
    pub name: String,
    pub design: DesignSpec,
    pub family: Family,
    pub beta: Vec<f64>,
    /// Cov(β̂): σ̂²(XᵀX)⁻¹ for gaussian, (XᵀVX)⁻¹ otherwise.
    pub cov_beta: Matrix,
    /// (XᵀX)⁻¹, gaussian only. Kept so n_eff survives σ̂² = 0.
    pub unscaled_cov: Option<Matrix>,
    pub dispersion: f64,
    pub n_dev: usize,
    pub deviance: f64,
    pub converged: bool,
    pub iterations: usize,
    pub warnings: Vec<FitWarning>,
    pub development: Option<DevelopmentSummary>,
}

impl FittedModel {
    pub fn p(&self) -> usize {
        self.beta.len()
    }

    pub fn with_design(mut self, design: DesignSpec) -> Result<Self> {
        if design.p() != self.p() {
            return Err(Error::DimensionMismatch {
                expected: self.p(),
                got: design.p(),
            });
        }
        self.design = design;
        Ok(self)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// η̂ = xᵀβ̂.
    pub fn linear_predictor(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.p() {
            return Err(Error::DimensionMismatch {
                expected: self.p(),
                got: x.len(),
            });
        }
        Ok(dot(x, &self.beta))
    }

    pub fn separation_suspected(&self) -> bool {
        self.warnings
            .iter()
            .any(|w| matches!(w, FitWarning::SeparationSuspected { .. }))
    }
}

fn check_shape(x: &Matrix, y: &[f64]) -> Result<()> {
    if y.len() != x.rows() {
        return Err(Error::DimensionMismatch {
            expected: x.rows(),
            got: y.len(),
        });
    }
    if x.rows() <= x.cols() {
        return Err(Error::TooFewRows {
            n: x.rows(),
            p: x.cols(),
        });
    }
    if !x.is_finite() {
        return Err(Error::NonFinite { what: "design matrix" });
    }
    Ok(())
}

fn rank_checked(err: Error) -> Error {
    match err {
        Error::NotPositiveDefinite { pivot, .. } => Error::RankDeficient { pivot },
        other => other,
    }
}

/// Ordinary least squares through the normal equations.
pub fn fit_ols(x: &Matrix, y: &[f64]) -> Result<FittedModel> {
    check_shape(x, y)?;
    Family::Gaussian.check_outcome(y)?;
    let xtx = weighted_gram(x, None);
    let chol = cholesky(&xtx).map_err(rank_checked)?;
    let xty = x.tr_matvec(y)?;
    let beta = chol.solve(&xty)?;
    Ok(gaussian_model(x, y, beta, chol.inverse(), 0))
}

fn gaussian_model(x: &Matrix, y: &[f64], beta: Vec<f64>, unscaled: Matrix, iterations: usize) -> FittedModel {
    let (n, p) = (x.rows(), x.cols());
    let rss: f64 = x
        .row_iter()
        .zip(y)
        .map(|(row, yi)| {
            let r = yi - dot(row, &beta);
            r * r
        })
        .sum();
    // exact fits leave rounding-level residuals
    let scale: f64 = y.iter().map(|v| v * v).sum::<f64>().max(1.0);
    let rss = if rss <= 1e-28 * scale { 0.0 } else { rss };
    let dispersion = rss / (n - p) as f64;
    FittedModel {
        name: String::new(),
        design: DesignSpec::anonymous(p),
        family: Family::Gaussian,
        cov_beta: unscaled.scaled(dispersion),
        unscaled_cov: Some(unscaled),
        beta,
        dispersion,
        n_dev: n,
        deviance: rss,
        converged: true,
        iterations,
        warnings: vec![],
        development: None,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IrlsOptions {
    pub max_iterations: usize,
    pub tolerance: f64,
    pub max_halvings: usize,
    /// Return an unconverged fit instead of [`Error::NotConverged`].
    pub allow_unconverged: bool,
}

impl Default for IrlsOptions {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            tolerance: 1e-10,
            max_halvings: 10,
            allow_unconverged: false,
        }
    }
}

pub fn fit_irls(x: &Matrix, y: &[f64], family: Family) -> Result<FittedModel> {
    fit_irls_with(x, y, family, &IrlsOptions::default())
}

pub fn fit_irls_with(x: &Matrix, y: &[f64], family: Family, opts: &IrlsOptions) -> Result<FittedModel> {
    fit_irls_traced(x, y, family, opts).map(|(m, _)| m)
}

/// As [`fit_irls_with`], also returning the deviance after every accepted step
/// (the first entry is the deviance at the starting values).
pub fn fit_irls_traced(x: &Matrix, y: &[f64], family: Family, opts: &IrlsOptions) -> Result<(FittedModel, Vec<f64>)> {
    check_shape(x, y)?;
    family.check_outcome(y)?;
    let (n, p) = (x.rows(), x.cols());

    let mut beta = vec![0.0; p];
    if x.column(0).iter().all(|&v| v == 1.0) {
        beta[0] = family.link(family.start_mean(y));
    }
    let deviance_at = |beta: &[f64]| -> (Vec<f64>, f64) {
        let eta: Vec<f64> = x.row_iter().map(|r| dot(r, beta)).collect();
        let dev = eta
            .iter()
            .zip(y)
            .map(|(&e, &yi)| family.unit_deviance(yi, e, family.inverse_link(e)))
            .sum();
        (eta, dev)
    };

    let (mut eta, mut dev) = deviance_at(&beta);
    let mut trace = vec![dev];
    let mut converged = false;
    let mut settled = false;
    let mut iterations = 0;

    'outer: while iterations < opts.max_iterations {
        iterations += 1;
        let mut w = Vec::with_capacity(n);
        let mut z = Vec::with_capacity(n);
        for (&e, &yi) in eta.iter().zip(y) {
            let mu = family.inverse_link(e);
            let d = family.mean_derivative(e);
            w.push(family.working_weight(e, 1.0).max(WEIGHT_FLOOR));
            z.push(e + (yi - mu) / d.max(f64::MIN_POSITIVE));
        }
        let xtwx = weighted_gram(x, Some(&w));
        let chol = cholesky(&xtwx).map_err(rank_checked)?;
        let wz: Vec<f64> = w.iter().zip(&z).map(|(a, b)| a * b).collect();
        let rhs = x.tr_matvec(&wz)?;
        let mut candidate = chol.solve(&rhs)?;

        let (mut cand_eta, mut cand_dev) = deviance_at(&candidate);
        let mut halvings = 0;
        while !cand_dev.is_finite() || cand_dev > dev {
            if cand_dev.is_finite() && (cand_dev - dev) / (dev.abs() + 0.1) < opts.tolerance {
                // rounding-level increase: at the optimum, and the unhalved
                // Newton step is the more accurate point
                if halvings == 0 {
                    beta = candidate;
                    trace.push(cand_dev);
                }
                converged = true;
                break 'outer;
            }
            if halvings == opts.max_halvings {
                break 'outer;
            }
            halvings += 1;
            for (c, b) in candidate.iter_mut().zip(&beta) {
                *c = 0.5 * (*c + b);
            }
            (cand_eta, cand_dev) = deviance_at(&candidate);
        }

        let rel_change = (cand_dev - dev).abs() / (cand_dev.abs() + 0.1);
        beta = candidate;
        eta = cand_eta;
        dev = cand_dev;
        trace.push(dev);
        // two small changes in a row: the last Newton step is a polish
        if rel_change < opts.tolerance {
            if settled {
                converged = true;
                break;
            }
            settled = true;
        } else {
            settled = false;
        }
    }

    if !converged && !opts.allow_unconverged {
        return Err(Error::NotConverged { iterations });
    }

    let mut model = if family == Family::Gaussian {
        let unscaled = cholesky(&weighted_gram(x, None)).map_err(rank_checked)?.inverse();
        gaussian_model(x, y, beta, unscaled, iterations)
    } else {
        let (v, floored) = glm_weights(x, &beta, family, 1.0);
        let cov = cholesky(&weighted_gram(x, Some(&v))).map_err(rank_checked)?.inverse();
        let max_abs_eta = eta.iter().fold(0.0_f64, |m, e| m.max(e.abs()));
        let mut warnings = vec![];
        if max_abs_eta > SEPARATION_ETA || floored > 0 {
            warnings.push(FitWarning::SeparationSuspected {
                max_abs_eta,
                floored_weights: floored,
            });
        }
        FittedModel {
            name: String::new(),
            design: DesignSpec::anonymous(p),
            family,
            beta,
            cov_beta: cov,
            unscaled_cov: None,
            dispersion: 1.0,
            n_dev: n,
            deviance: dev,
            converged,
            iterations,
            warnings,
            development: None,
        }
    };
    model.converged = converged;
    Ok((model, trace))
}

/// Fits with the estimator appropriate for the family.
pub fn fit(x: &Matrix, y: &[f64], family: Family, opts: &IrlsOptions) -> Result<FittedModel> {
    match family {
        Family::Gaussian => fit_ols(x, y),
        _ => fit_irls_with(x, y, family, opts),
    }
}

/// Diagonal of V: vᵢᵢ = (dg⁻¹/dη)² / Var(Yᵢ | η̂ᵢ), floored at [`WEIGHT_FLOOR`].
///
/// For gaussian models this is 1/σ̂²; a zero dispersion yields unit weights,
/// the unscaled (XᵀX) convention.
pub fn weight_matrix(x: &Matrix, beta: &[f64], family: Family, dispersion: f64) -> Vec<f64> {
    glm_weights(x, beta, family, dispersion).0
}

fn glm_weights(x: &Matrix, beta: &[f64], family: Family, dispersion: f64) -> (Vec<f64>, usize) {
    let mut floored = 0;
    let w = x
        .row_iter()
        .map(|row| {
            let v = match family {
                Family::Gaussian if dispersion > 0.0 => 1.0 / dispersion,
                Family::Gaussian => 1.0,
                _ => family.working_weight(dot(row, beta), dispersion),
            };
            if v.is_nan() || v < WEIGHT_FLOOR {
                floored += 1;
                WEIGHT_FLOOR
            } else {
                v
            }
        })
        .collect();
    (w, floored)
}
