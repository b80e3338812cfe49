//! Effective sample size of individual predictions.
//!
//! For a new covariate row `x`, the effective sample size is the number of
//! hypothetical patients sharing `x` whose sample mean would be as uncertain
//! as the model's prediction:
//!
//! ```text
//! n_eff = Var(Y | η̂) / Var(ŷ),   Var(ŷ) ≈ xᵀ Cov(β̂) x · (dg⁻¹/dη)²
//! ```
//!
//! For gaussian models this is `1 / xᵀ(XᵀX)⁻¹x` and depends only on the
//! design. At development rows it is the reciprocal of the (approximated)
//! leverage, so the harmonic mean over the development sample is `n / p`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::glm::{weight_matrix, Family, FittedModel};
use crate::linalg::{quadratic_form, Matrix};

/// Distance from 0 or 1 at which a binomial prediction counts as boundary.
pub const BOUNDARY_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Annotation {
    /// n_eff < 1: the query lies far outside the development data.
    Extrapolation,
    /// n_eff > n_dev. Possible for non-gaussian models.
    ExceedsDevN,
    /// Binomial prediction within [`BOUNDARY_EPS`] of 0 or 1; n_eff is +inf.
    Boundary,
}

impl Annotation {
    pub fn as_str(self) -> &'static str {
        match self {
            Annotation::Extrapolation => "extrapolation",
            Annotation::ExceedsDevN => "exceeds_dev_n",
            Annotation::Boundary => "boundary",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PredictionWithUncertainty {
    /// η̂ = xᵀβ̂
    pub eta: f64,
    /// g⁻¹(η̂)
    pub yhat: f64,
    /// Delta-method variance of ŷ.
    pub var_pred: f64,
    pub se_pred: f64,
    /// Var(ŷ) / Var(Y | η̂) = 1 / n_eff.
    pub rel_var: f64,
    /// +inf when [`Annotation::Boundary`] is set.
    pub n_eff: f64,
    /// Var(Y | η̂).
    pub cond_var: f64,
    pub annotations: Vec<Annotation>,
}

impl PredictionWithUncertainty {
    pub fn is_boundary(&self) -> bool {
        self.annotations.contains(&Annotation::Boundary)
    }

    fn annotate(mut self, n_dev: usize) -> Self {
        if self.is_boundary() {
            return self;
        }
        if self.n_eff < 1.0 {
            self.annotations.push(Annotation::Extrapolation);
        }
        if self.n_eff > n_dev as f64 {
            self.annotations.push(Annotation::ExceedsDevN);
        }
        self
    }
}

fn check_dim(model: &FittedModel, x: &[f64]) -> Result<()> {
    if x.len() != model.p() {
        return Err(Error::DimensionMismatch {
            expected: model.p(),
            got: x.len(),
        });
    }
    Ok(())
}

/// Effective sample size for a gaussian (linear) model: `1 / xᵀ(XᵀX)⁻¹x`.
///
/// Uses the stored unscaled inverse, so the result is independent of the
/// outcome and stays defined when σ̂² = 0.
pub fn neff_linear(model: &FittedModel, x_new: &[f64]) -> Result<PredictionWithUncertainty> {
    if model.family != Family::Gaussian {
        return Err(Error::corrupt(
            "family",
            format!("neff_linear needs a gaussian model, got {}", model.family),
        ));
    }
    check_dim(model, x_new)?;
    let unscaled = model
        .unscaled_cov
        .as_ref()
        .ok_or_else(|| Error::corrupt("unscaled_xtx_inverse", "missing for gaussian model"))?;
    let rel_var = quadratic_form(unscaled, x_new)?;
    let eta = model.linear_predictor(x_new)?;
    let var_pred = rel_var * model.dispersion;
    Ok(PredictionWithUncertainty {
        eta,
        yhat: eta,
        var_pred,
        se_pred: var_pred.sqrt(),
        rel_var,
        n_eff: 1.0 / rel_var,
        cond_var: model.dispersion,
        annotations: vec![],
    }
    .annotate(model.n_dev))
}

/// Effective sample size for any fitted family via the delta method.
///
/// Gaussian models with zero dispersion fall back to [`neff_linear`].
pub fn neff_glm(model: &FittedModel, x_new: &[f64]) -> Result<PredictionWithUncertainty> {
    check_dim(model, x_new)?;
    if model.family == Family::Gaussian && model.dispersion == 0.0 {
        return neff_linear(model, x_new);
    }
    let fam = model.family;
    let eta = model.linear_predictor(x_new)?;
    let yhat = fam.inverse_link(eta);
    let cond_var = fam.variance(yhat, model.dispersion);

    if fam == Family::Binomial && (yhat <= BOUNDARY_EPS || yhat >= 1.0 - BOUNDARY_EPS) {
        return Ok(PredictionWithUncertainty {
            eta,
            yhat,
            var_pred: 0.0,
            se_pred: 0.0,
            rel_var: 0.0,
            n_eff: f64::INFINITY,
            cond_var,
            annotations: vec![Annotation::Boundary],
        });
    }

    let d = fam.mean_derivative(eta);
    let var_eta = quadratic_form(&model.cov_beta, x_new)?;
    let var_pred = var_eta * d * d;
    Ok(PredictionWithUncertainty {
        eta,
        yhat,
        var_pred,
        se_pred: var_pred.sqrt(),
        rel_var: var_pred / cond_var,
        n_eff: cond_var / var_pred,
        cond_var,
        annotations: vec![],
    }
    .annotate(model.n_dev))
}

/// Routes to [`neff_linear`] for gaussian models, [`neff_glm`] otherwise.
pub fn predict(model: &FittedModel, x_new: &[f64]) -> Result<PredictionWithUncertainty> {
    match model.family {
        Family::Gaussian => neff_linear(model, x_new),
        _ => neff_glm(model, x_new),
    }
}

pub fn relvar(p: &PredictionWithUncertainty) -> Result<f64> {
    if p.is_boundary() || !p.n_eff.is_finite() {
        return Err(Error::BoundaryFlagPropagated);
    }
    Ok(1.0 / p.n_eff)
}

/// Diagonal of the (approximated) hat matrix for the development rows.
#[derive(Clone, Debug, PartialEq)]
pub struct LeverageSet {
    pub h: Vec<f64>,
}

impl LeverageSet {
    pub fn n_eff(&self) -> Vec<f64> {
        self.h.iter().map(|h| 1.0 / h).collect()
    }

    pub fn trace(&self) -> f64 {
        self.h.iter().sum()
    }

    /// n / Σ hᵢᵢ; equals n / p when `x_dev` is the fitting design.
    pub fn harmonic_mean_neff(&self) -> f64 {
        self.h.len() as f64 / self.trace()
    }
}

/// hᵢᵢ = vᵢᵢ · xᵢᵀ(XᵀVX)⁻¹xᵢ, row by row; the n×n hat matrix is never formed.
pub fn leverages(model: &FittedModel, x_dev: &Matrix) -> Result<LeverageSet> {
    if x_dev.cols() != model.p() {
        return Err(Error::DimensionMismatch {
            expected: model.p(),
            got: x_dev.cols(),
        });
    }
    let h = match (&model.family, &model.unscaled_cov) {
        (Family::Gaussian, Some(u)) => x_dev
            .row_iter()
            .map(|r| quadratic_form(u, r))
            .collect::<Result<Vec<_>>>()?,
        (Family::Gaussian, None) => return Err(Error::corrupt("unscaled_xtx_inverse", "missing for gaussian model")),
        (fam, _) => {
            let v = weight_matrix(x_dev, &model.beta, *fam, model.dispersion);
            x_dev
                .row_iter()
                .zip(v)
                .map(|(r, vi)| Ok(vi * quadratic_form(&model.cov_beta, r)?))
                .collect::<Result<Vec<_>>>()?
        }
    };
    Ok(LeverageSet { h })
}
