//! JSON model files.
//!
//! A model file holds everything needed to score new patients without the
//! development data. Floats are written in their shortest round-trip decimal
//! form, so reloading reproduces every value bit for bit.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::design::DesignSpec;
use crate::error::{Error, Result};
use crate::glm::{Family, FitWarning, FittedModel};
use crate::linalg::Matrix;
use crate::report::DevelopmentSummary;

pub const MODEL_SCHEMA_VERSION: u32 = 1;
const SYMMETRY_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub schema_version: u32,
    #[serde(default)]
    pub model_name: String,
    pub family: Family,
    pub design: DesignSpec,
    pub beta: Vec<f64>,
    /// p×p, row-major.
    pub cov_beta: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unscaled_xtx_inverse: Option<Vec<f64>>,
    pub dispersion: f64,
    pub n_dev: usize,
    pub deviance: f64,
    pub converged: bool,
    #[serde(default)]
    pub iterations: usize,
    #[serde(default)]
    pub warnings: Vec<FitWarning>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub development: Option<DevelopmentSummary>,
}

impl From<&FittedModel> for ModelFile {
    fn from(m: &FittedModel) -> Self {
        Self {
            schema_version: MODEL_SCHEMA_VERSION,
            model_name: m.name.clone(),
            family: m.family,
            design: m.design.clone(),
            beta: m.beta.clone(),
            cov_beta: m.cov_beta.as_slice().to_vec(),
            unscaled_xtx_inverse: m.unscaled_cov.as_ref().map(|u| u.as_slice().to_vec()),
            dispersion: m.dispersion,
            n_dev: m.n_dev,
            deviance: m.deviance,
            converged: m.converged,
            iterations: m.iterations,
            warnings: m.warnings.clone(),
            development: m.development.clone(),
        }
    }
}

fn square(field: &str, data: Vec<f64>, p: usize) -> Result<Matrix> {
    if data.iter().any(|v| !v.is_finite()) {
        return Err(Error::corrupt(field, "non-finite entry"));
    }
    let m =
        Matrix::from_row_major(p, p, data).map_err(|_| Error::corrupt(field, format!("expected {} entries", p * p)))?;
    if m.asymmetry() > SYMMETRY_TOLERANCE * m.max_abs().max(1.0) {
        return Err(Error::corrupt(field, "not symmetric"));
    }
    Ok(m)
}

impl TryFrom<ModelFile> for FittedModel {
    type Error = Error;

    fn try_from(f: ModelFile) -> Result<Self> {
        if f.schema_version != MODEL_SCHEMA_VERSION {
            return Err(Error::SchemaVersionUnsupported(f.schema_version));
        }
        let design =
            DesignSpec::new(f.design.covariates().to_vec()).map_err(|e| Error::corrupt("design", e.to_string()))?;
        let p = design.p();
        if f.beta.len() != p {
            return Err(Error::corrupt(
                "beta",
                format!("expected {p} coefficients, found {}", f.beta.len()),
            ));
        }
        if f.beta.iter().any(|v| !v.is_finite()) {
            return Err(Error::corrupt("beta", "non-finite coefficient"));
        }
        let cov_beta = square("cov_beta", f.cov_beta, p)?;
        let unscaled_cov = match (f.family, f.unscaled_xtx_inverse) {
            (Family::Gaussian, Some(u)) => Some(square("unscaled_xtx_inverse", u, p)?),
            (Family::Gaussian, None) => {
                return Err(Error::corrupt("unscaled_xtx_inverse", "required for gaussian models"))
            }
            (_, Some(_)) => return Err(Error::corrupt("unscaled_xtx_inverse", "only valid for gaussian models")),
            (_, None) => None,
        };
        let dispersion_ok = match f.family {
            Family::Gaussian => f.dispersion.is_finite() && f.dispersion >= 0.0,
            _ => f.dispersion == 1.0,
        };
        if !dispersion_ok {
            return Err(Error::corrupt("dispersion", format!("invalid value {}", f.dispersion)));
        }
        if f.n_dev <= p {
            return Err(Error::corrupt("n_dev", "must exceed the number of parameters"));
        }
        if let Some(dev) = &f.development {
            if dev.covariates.len() != p - 1 {
                return Err(Error::corrupt("development", "covariate summary length"));
            }
            if let Some(s) = &dev.sorted_neff {
                if s.len() != f.n_dev || s.windows(2).any(|w| w[0] > w[1]) {
                    return Err(Error::corrupt(
                        "development.sorted_neff",
                        "must be sorted with n_dev entries",
                    ));
                }
            }
        }
        Ok(FittedModel {
            name: f.model_name,
            design,
            family: f.family,
            beta: f.beta,
            cov_beta,
            unscaled_cov,
            dispersion: f.dispersion,
            n_dev: f.n_dev,
            deviance: f.deviance,
            converged: f.converged,
            iterations: f.iterations,
            warnings: f.warnings,
            development: f.development,
        })
    }
}

pub fn to_json(model: &FittedModel) -> Result<String> {
    Ok(serde_json::to_string_pretty(&ModelFile::from(model))?)
}

pub fn from_json(text: &str) -> Result<FittedModel> {
    // Check the version before the full schema so old or future files get a clear error.
    #[derive(Deserialize)]
    struct Version {
        schema_version: u32,
    }
    let v: Version = serde_json::from_str(text)?;
    if v.schema_version != MODEL_SCHEMA_VERSION {
        return Err(Error::SchemaVersionUnsupported(v.schema_version));
    }
    let file: ModelFile = serde_json::from_str(text)?;
    file.try_into()
}

/// Writes atomically: a temp file in the target directory, then rename.
pub fn save(model: &FittedModel, path: impl AsRef<Path>, allow_unconverged: bool) -> Result<()> {
    if !model.converged && !allow_unconverged {
        return Err(Error::UnconvergedWithoutOverride);
    }
    let path = path.as_ref();
    let json = to_json(model)?;
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(json.as_bytes())
        .and_then(|_| tmp.write_all(b"\n"))
        .map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<FittedModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    from_json(&text)
}
