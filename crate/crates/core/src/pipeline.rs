//! Fitting from a dataset and scoring single patients. The command line and
//! the HTTP API both go through [`predict_record`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::design::{Dataset, DesignSpec};
use crate::error::Result;
use crate::glm::{fit, Family, FittedModel, IrlsOptions};
use crate::neff::{leverages, predict, Annotation};
use crate::report::{inf_as_null, summarize, CovariateSummary, DevelopmentSummary};

/// Development samples up to this size keep their full sorted n_eff vector.
pub const MAX_STORED_DEV_NEFF: usize = 100_000;

#[derive(Clone, Debug)]
pub struct FitSettings {
    pub name: String,
    pub family: Family,
    pub outcome: String,
    pub thresholds: Vec<f64>,
    pub irls: IrlsOptions,
}

/// Fits `spec` to `data` and attaches the development n_eff summary.
pub fn fit_dataset(data: &Dataset, spec: DesignSpec, settings: &FitSettings) -> Result<FittedModel> {
    let x = spec.build_design(data)?;
    let y = data.column(&settings.outcome)?;
    let model = fit(&x, y, settings.family, &settings.irls)?
        .with_design(spec)?
        .with_name(settings.name.clone());
    attach_development(model, data, &x, &settings.thresholds)
}

pub fn attach_development(
    mut model: FittedModel,
    data: &Dataset,
    x: &crate::linalg::Matrix,
    thresholds: &[f64],
) -> Result<FittedModel> {
    let lev = leverages(&model, x)?;
    let values = lev.n_eff();
    let mut neff = summarize(&values, thresholds)?;
    // per-row values are not persisted; `sorted_neff` carries them
    neff.values.clear();
    let covariates = model
        .design
        .covariates()
        .iter()
        .map(|c| {
            let col = data.column(&c.name)?;
            Ok(CovariateSummary {
                name: c.name.clone(),
                min: col.iter().copied().fold(f64::INFINITY, f64::min),
                max: col.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                mean: col.iter().sum::<f64>() / col.len() as f64,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let sorted_neff = (values.len() <= MAX_STORED_DEV_NEFF).then(|| {
        let mut v = values;
        v.sort_by(f64::total_cmp);
        v
    });
    model.development = Some(DevelopmentSummary {
        covariates,
        thresholds: thresholds.to_vec(),
        neff,
        sorted_neff,
    });
    Ok(model)
}

/// One patient's prediction as reported to users.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionReport {
    pub yhat: f64,
    pub eta: f64,
    pub se_pred: f64,
    pub rel_var: f64,
    #[serde(with = "inf_as_null")]
    pub n_eff: f64,
    /// Rounded for communication; `> n_dev` when n_eff exceeds the development size.
    pub n_eff_display: String,
    pub dev_percentile: Option<f64>,
    /// Predicted risk out of 100, binomial models only.
    pub per_hundred: Option<u32>,
    pub annotations: Vec<Annotation>,
}

pub fn predict_record<K: AsRef<str> + Ord>(model: &FittedModel, record: &BTreeMap<K, f64>) -> Result<PredictionReport> {
    let x = model.design.encode(record)?;
    let p = predict(model, &x)?;
    let n_eff_display =
        if p.annotations.contains(&Annotation::Boundary) || p.annotations.contains(&Annotation::ExceedsDevN) {
            format!("> {}", model.n_dev)
        } else if p.n_eff < 1.0 {
            "< 1".to_string()
        } else {
            format!("{}", p.n_eff.round())
        };
    Ok(PredictionReport {
        yhat: p.yhat,
        eta: p.eta,
        se_pred: p.se_pred,
        rel_var: p.rel_var,
        n_eff: p.n_eff,
        n_eff_display,
        dev_percentile: model.development.as_ref().map(|d| d.percentile(p.n_eff)),
        per_hundred: (model.family == Family::Binomial).then(|| (p.yhat * 100.0).round() as u32),
        annotations: p.annotations,
    })
}
