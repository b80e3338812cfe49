use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    // numeric kernels
    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    // data ingestion and encoding
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("non-numeric cell at row {row}, column `{column}`: {value:?}")]
    NonNumericCell { row: usize, column: String, value: String },
    #[error("missing value at row {row}, column `{column}`")]
    MissingValue { row: usize, column: String },
    #[error("empty file: {0}")]
    EmptyFile(PathBuf),
    #[error("unknown covariate `{0}`")]
    UnknownCovariate(String),
    #[error("missing covariate `{0}`")]
    MissingCovariate(String),
    #[error("binary covariate `{name}` must be 0 or 1, got {value}")]
    BinaryOutOfDomain { name: String, value: f64 },
    #[error("invalid design: {0}")]
    InvalidDesign(String),

    // fitting
    #[error("too few rows: n = {n} must exceed p = {p}")]
    TooFewRows { n: usize, p: usize },
    #[error("design is rank deficient (cholesky pivot {pivot} failed)")]
    RankDeficient { pivot: usize },
    #[error("IRLS did not converge after {iterations} iterations")]
    NotConverged { iterations: usize },
    #[error("invalid outcome at row {row}: {reason}")]
    InvalidOutcome { row: usize, reason: String },

    // effective sample size
    #[error("prediction is at the boundary of the outcome range; n_eff is unbounded")]
    BoundaryFlagPropagated,
    #[error("dispersion is zero; the simulated variance ratio is undefined")]
    DegenerateDispersion,
    #[error("at least {min} replicates are required, got {got}")]
    TooFewReplicates { min: usize, got: usize },
    #[error("{dropped} of {total} resimulated fits failed (limit 5%)")]
    ResimulationNotConverged { dropped: usize, total: usize },

    // reports
    #[error("empty input")]
    EmptyInput,
    #[error("invalid n_eff value {0} (must be positive or +inf)")]
    InvalidNeff(f64),
    #[error("grid plots need a model with one or two covariates, found {0}")]
    GridOnNonTwoCovariateModel(usize),
    #[error("unknown plot kind `{0}`")]
    UnknownKind(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    // persistence
    #[error("refusing to save an unconverged model without override")]
    UnconvergedWithoutOverride,
    #[error("unsupported schema version {0}")]
    SchemaVersionUnsupported(u32),
    #[error("corrupt field `{field}`: {reason}")]
    CorruptField { field: String, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn corrupt(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::CorruptField {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
