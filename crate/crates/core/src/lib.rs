//! Effective sample size of individual predictions from linear and generalized
//! linear models.
//!
//! The effective sample size of a prediction is the number of hypothetical
//! patients with the same covariates whose sample mean outcome would be as
//! uncertain as the model's prediction. Small values flag patients the
//! development data says little about.
//!
//! ```
//! use neff::{fit_ols, neff_linear, Matrix};
//!
//! let x = Matrix::from_rows(&[[1.0, 0.0], [1.0, 1.0], [1.0, 2.0]]);
//! let model = fit_ols(&x, &[0.0, 0.0, 3.0]).unwrap();
//! let p = neff_linear(&model, &[1.0, 1.0]).unwrap();
//! assert!((p.n_eff - 3.0).abs() < 1e-12);
//! ```
//!
//! Modules:
//! - [`linalg`]: Cholesky, SPD solves and inverses, quadratic forms.
//! - [`design`]: CSV ingestion and design-matrix encoding.
//! - [`glm`]: OLS and IRLS fitting for gaussian, binomial and poisson families.
//! - [`neff`]: effective sample size, relative variance, leverages.
//! - [`simulate`]: resimulation estimate used to check the delta method.
//! - [`report`]: n_eff distributions, dev/validation comparison, plot data.
//! - [`store`]: JSON model files.
//! - [`api`], [`cli`]: HTTP and command-line front ends.

pub mod api;
pub mod cli;
pub mod design;
pub mod error;
pub mod glm;
pub mod linalg;
pub mod neff;
pub mod pipeline;
pub mod report;
pub mod simulate;
pub mod store;

pub use design::{read_csv, CovariateKind, CovariateSpec, Dataset, DesignSpec};
pub use error::{Error, Result};
pub use glm::{fit_irls, fit_ols, weight_matrix, Family, FittedModel, IrlsOptions};
pub use linalg::{cholesky, quadratic_form, solve_spd, spd_inverse, Matrix};
pub use neff::{leverages, neff_glm, neff_linear, predict, relvar, Annotation, LeverageSet, PredictionWithUncertainty};
pub use pipeline::{fit_dataset, predict_record, FitSettings, PredictionReport};
pub use report::{compare, summarize, NeffDistribution, ReportBundle};
pub use simulate::{neff_simulated, SimulatedNeff};
