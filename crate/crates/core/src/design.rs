//! CSV ingestion and design-matrix encoding.
//!
//! A [`DesignSpec`] records how raw covariate values become a row of the
//! design matrix: an intercept, then each covariate in order, continuous ones
//! shifted by their centering constant. The same spec encodes development
//! rows and new patients, so a model file can score patients in raw units.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CovariateKind {
    Continuous,
    Binary,
}

impl fmt::Display for CovariateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CovariateKind::Continuous => "continuous",
            CovariateKind::Binary => "binary",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovariateSpec {
    pub name: String,
    pub kind: CovariateKind,
    #[serde(default)]
    pub center: f64,
}

impl CovariateSpec {
    pub fn continuous(name: impl Into<String>, center: f64) -> Self {
        Self {
            name: name.into(),
            kind: CovariateKind::Continuous,
            center,
        }
    }

    pub fn binary(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: CovariateKind::Binary,
            center: 0.0,
        }
    }

    fn encode_value(&self, value: f64) -> Result<f64> {
        if !value.is_finite() {
            return Err(Error::NonFinite {
                what: "covariate value",
            });
        }
        match self.kind {
            CovariateKind::Continuous => Ok(value - self.center),
            CovariateKind::Binary if value == 0.0 || value == 1.0 => Ok(value),
            CovariateKind::Binary => Err(Error::BinaryOutOfDomain {
                name: self.name.clone(),
                value,
            }),
        }
    }
}

/// Intercept plus an ordered list of covariates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignSpec {
    covariates: Vec<CovariateSpec>,
}

impl DesignSpec {
    pub fn new(covariates: Vec<CovariateSpec>) -> Result<Self> {
        let mut seen = HashSet::new();
        for c in &covariates {
            if c.name.is_empty() {
                return Err(Error::InvalidDesign("empty covariate name".into()));
            }
            if !seen.insert(c.name.as_str()) {
                return Err(Error::InvalidDesign(format!("duplicate covariate `{}`", c.name)));
            }
            if !c.center.is_finite() {
                return Err(Error::InvalidDesign(format!("center of `{}` is not finite", c.name)));
            }
            if c.kind == CovariateKind::Binary && c.center != 0.0 {
                return Err(Error::InvalidDesign(format!(
                    "binary covariate `{}` cannot be centered",
                    c.name
                )));
            }
        }
        Ok(Self { covariates })
    }

    pub fn intercept_only() -> Self {
        Self { covariates: vec![] }
    }

    /// Placeholder names `x1..x{p-1}` for models fitted straight from a matrix.
    pub fn anonymous(p: usize) -> Self {
        Self {
            covariates: (1..p)
                .map(|j| CovariateSpec::continuous(format!("x{j}"), 0.0))
                .collect(),
        }
    }

    pub fn covariates(&self) -> &[CovariateSpec] {
        &self.covariates
    }

    pub fn covariate(&self, name: &str) -> Option<&CovariateSpec> {
        self.covariates.iter().find(|c| c.name == name)
    }

    pub fn names(&self) -> Vec<&str> {
        self.covariates.iter().map(|c| c.name.as_str()).collect()
    }

    /// Number of model parameters, intercept included.
    pub fn p(&self) -> usize {
        1 + self.covariates.len()
    }

    /// Replaces every continuous covariate's center with its sample mean.
    pub fn centered_at_means(mut self, data: &Dataset) -> Result<Self> {
        let names: Vec<&str> = self
            .covariates
            .iter()
            .filter(|c| c.kind == CovariateKind::Continuous)
            .map(|c| c.name.as_str())
            .collect();
        let means = marginal_means(data, &names)?;
        for c in &mut self.covariates {
            if let Some(m) = means.get(&c.name) {
                c.center = *m;
            }
        }
        Ok(self)
    }

    /// Encodes a record keyed by covariate name. Every covariate must be
    /// present and no other keys are accepted.
    pub fn encode<K: AsRef<str> + Ord>(&self, record: &BTreeMap<K, f64>) -> Result<Vec<f64>> {
        for key in record.keys() {
            if self.covariate(key.as_ref()).is_none() {
                return Err(Error::UnknownCovariate(key.as_ref().to_string()));
            }
        }
        let mut row = Vec::with_capacity(self.p());
        row.push(1.0);
        for c in &self.covariates {
            let v = record
                .iter()
                .find(|(k, _)| k.as_ref() == c.name)
                .map(|(_, v)| *v)
                .ok_or_else(|| Error::MissingCovariate(c.name.clone()))?;
            row.push(c.encode_value(v)?);
        }
        Ok(row)
    }

    /// Inverse of [`encode`](Self::encode): design row back to raw values.
    pub fn decode(&self, row: &[f64]) -> Result<BTreeMap<String, f64>> {
        if row.len() != self.p() {
            return Err(Error::DimensionMismatch {
                expected: self.p(),
                got: row.len(),
            });
        }
        Ok(self
            .covariates
            .iter()
            .zip(&row[1..])
            .map(|(c, v)| (c.name.clone(), v + c.center))
            .collect())
    }

    /// Encodes every row of `data`. Columns not named by the spec are ignored.
    pub fn build_design(&self, data: &Dataset) -> Result<Matrix> {
        let cols = self
            .covariates
            .iter()
            .map(|c| data.column(&c.name))
            .collect::<Result<Vec<_>>>()?;
        let n = data.n_rows();
        let mut out = Vec::with_capacity(n * self.p());
        for i in 0..n {
            out.push(1.0);
            for (c, col) in self.covariates.iter().zip(&cols) {
                out.push(c.encode_value(col[i])?);
            }
        }
        Matrix::from_row_major(n, self.p(), out)
    }
}

/// Column-oriented numeric table. Row order is the order of the source file.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl Dataset {
    pub fn from_columns<S: Into<String>>(columns: Vec<(S, Vec<f64>)>) -> Result<Self> {
        let mut names = Vec::with_capacity(columns.len());
        let mut data = Vec::with_capacity(columns.len());
        let n = columns.first().map_or(0, |(_, c)| c.len());
        for (name, col) in columns {
            if col.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: col.len(),
                });
            }
            names.push(name.into());
            data.push(col);
        }
        Ok(Self { names, columns: data })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn column(&self, name: &str) -> Result<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|j| self.columns[j].as_slice())
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    }

    pub fn record(&self, row: usize) -> BTreeMap<String, f64> {
        self.names
            .iter()
            .zip(&self.columns)
            .map(|(n, c)| (n.clone(), c[row]))
            .collect()
    }
}

/// Reads the named columns from a comma-separated file with a header line.
///
/// Ingestion is strict: an empty cell or a non-numeric cell is an error.
/// Row numbers in errors count data rows from 1. Extra columns in the file
/// are skipped.
pub fn read_csv(path: impl AsRef<Path>, schema: &[&str]) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv_from(file, schema).map_err(|e| match e {
        Error::EmptyFile(_) => Error::EmptyFile(path.to_path_buf()),
        other => other,
    })
}

pub fn read_csv_from<R: std::io::Read>(reader: R, schema: &[&str]) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(false)
        .from_reader(reader);
    let mut records = rdr.records();
    let header = match records.next() {
        Some(h) => h?,
        None => return Err(Error::EmptyFile(Default::default())),
    };
    let header: Vec<&str> = header.iter().collect();
    let index = schema
        .iter()
        .map(|name| {
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::MissingColumn(name.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut columns = vec![Vec::new(); schema.len()];
    for (r, rec) in records.enumerate() {
        let rec = rec?;
        let row = r + 1;
        for ((j, name), col) in index.iter().zip(schema).zip(columns.iter_mut()) {
            let cell = rec.get(*j).unwrap_or("");
            if cell.is_empty() {
                return Err(Error::MissingValue {
                    row,
                    column: name.to_string(),
                });
            }
            let v: f64 = cell.parse().map_err(|_| Error::NonNumericCell {
                row,
                column: name.to_string(),
                value: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonNumericCell {
                    row,
                    column: name.to_string(),
                    value: cell.to_string(),
                });
            }
            col.push(v);
        }
    }
    if columns.first().is_some_and(Vec::is_empty) {
        return Err(Error::EmptyFile(Default::default()));
    }
    Dataset::from_columns(schema.iter().copied().zip(columns).collect())
}

pub fn marginal_means(data: &Dataset, names: &[&str]) -> Result<BTreeMap<String, f64>> {
    names
        .iter()
        .map(|name| {
            let col = data.column(name)?;
            let mean = col.iter().sum::<f64>() / col.len() as f64;
            Ok((name.to_string(), mean))
        })
        .collect()
}

/// Parses `name=value` pairs as used on the command line.
pub fn parse_assignment(s: &str) -> Result<(String, f64)> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| Error::InvalidDesign(format!("expected name=value, got `{s}`")))?;
    let v = f64::from_str(value.trim()).map_err(|_| Error::NonNumericCell {
        row: 0,
        column: name.trim().to_string(),
        value: value.to_string(),
    })?;
    Ok((name.trim().to_string(), v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn age_shock() -> DesignSpec {
        DesignSpec::new(vec![
            CovariateSpec::continuous("age", 61.0),
            CovariateSpec::binary("shock"),
        ])
        .unwrap()
    }

    #[test]
    fn reads_one_row() {
        let d = read_csv_from("age,shock,DAY30\n61,1,0\n".as_bytes(), &["age", "shock", "DAY30"]).unwrap();
        assert_eq!(d.n_rows(), 1);
        assert_eq!(d.column("shock").unwrap(), &[1.0]);
    }

    #[test]
    fn ingestion_errors() {
        let e = read_csv_from("age,shock,DAY30\n61,,0\n".as_bytes(), &["age", "shock", "DAY30"]).unwrap_err();
        assert!(matches!(e, Error::MissingValue { row: 1, ref column } if column == "shock"));

        let e = read_csv_from("age,shock\n61,1\n".as_bytes(), &["height"]).unwrap_err();
        assert!(matches!(e, Error::MissingColumn(ref c) if c == "height"));

        let e = read_csv_from("age\n61\nold\n".as_bytes(), &["age"]).unwrap_err();
        assert!(matches!(e, Error::NonNumericCell { row: 2, .. }));

        assert!(matches!(
            read_csv_from("".as_bytes(), &["age"]),
            Err(Error::EmptyFile(_))
        ));
        assert!(matches!(
            read_csv_from("age\n".as_bytes(), &["age"]),
            Err(Error::EmptyFile(_))
        ));
    }

    #[test]
    fn column_names_are_case_sensitive() {
        let e = read_csv_from("Age\n61\n".as_bytes(), &["age"]).unwrap_err();
        assert!(matches!(e, Error::MissingColumn(_)));
    }

    #[test]
    fn encode_examples() {
        let spec = DesignSpec::new(vec![CovariateSpec::continuous("age", 61.0)]).unwrap();
        let rec = BTreeMap::from([("age", 61.0)]);
        assert_eq!(spec.encode(&rec).unwrap(), vec![1.0, 0.0]);

        let spec = age_shock();
        let rec = BTreeMap::from([("age", 81.0), ("shock", 1.0)]);
        assert_eq!(spec.encode(&rec).unwrap(), vec![1.0, 20.0, 1.0]);

        let rec = BTreeMap::from([("age", 81.0), ("shock", 2.0)]);
        assert!(matches!(spec.encode(&rec), Err(Error::BinaryOutOfDomain { .. })));
        let rec = BTreeMap::from([("age", 81.0)]);
        assert!(matches!(spec.encode(&rec), Err(Error::MissingCovariate(ref n)) if n == "shock"));
        let rec = BTreeMap::from([("age", 81.0), ("shock", 0.0), ("z", 1.0)]);
        assert!(matches!(spec.encode(&rec), Err(Error::UnknownCovariate(ref n)) if n == "z"));
    }

    #[test]
    fn spec_validation() {
        let dup = DesignSpec::new(vec![CovariateSpec::continuous("a", 0.0), CovariateSpec::binary("a")]);
        assert!(dup.is_err());
        let centered_binary = DesignSpec::new(vec![CovariateSpec {
            name: "s".into(),
            kind: CovariateKind::Binary,
            center: 0.5,
        }]);
        assert!(centered_binary.is_err());
    }

    #[test]
    fn build_design_examples() {
        let data = Dataset::from_columns(vec![("x", vec![0.0, 1.0, 2.0])]).unwrap();
        let spec = DesignSpec::new(vec![CovariateSpec::continuous("x", 0.0)]).unwrap();
        assert_eq!(
            spec.build_design(&data).unwrap(),
            Matrix::from_rows(&[[1.0, 0.0], [1.0, 1.0], [1.0, 2.0]])
        );
        let spec = DesignSpec::new(vec![CovariateSpec::continuous("x", 1.0)]).unwrap();
        assert_eq!(
            spec.build_design(&data).unwrap(),
            Matrix::from_rows(&[[1.0, -1.0], [1.0, 0.0], [1.0, 1.0]])
        );
        let x = DesignSpec::intercept_only().build_design(&data).unwrap();
        assert_eq!(x, Matrix::from_rows(&[[1.0], [1.0], [1.0]]));
    }

    #[test]
    fn build_design_rows_equal_encode() {
        let data = Dataset::from_columns(vec![
            ("age", vec![50.0, 61.0, 72.5, 90.0]),
            ("shock", vec![0.0, 1.0, 0.0, 1.0]),
            ("DAY30", vec![0.0, 0.0, 1.0, 1.0]),
        ])
        .unwrap();
        let spec = age_shock();
        let x = spec.build_design(&data).unwrap();
        for i in 0..data.n_rows() {
            let mut rec = data.record(i);
            rec.remove("DAY30");
            assert_eq!(x.row(i), spec.encode(&rec).unwrap().as_slice());
            let back = spec.decode(x.row(i)).unwrap();
            for (k, v) in &back {
                assert!((v - rec[k]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn means() {
        let data = Dataset::from_columns(vec![("a", vec![0.0, 1.0, 2.0]), ("b", vec![61.0, 61.0, 61.0])]).unwrap();
        let m = marginal_means(&data, &["a", "b"]).unwrap();
        assert_eq!(m["a"], 1.0);
        assert_eq!(m["b"], 61.0);
        assert!(marginal_means(&data, &["c"]).is_err());

        let spec = DesignSpec::new(vec![CovariateSpec::continuous("a", 0.0)])
            .unwrap()
            .centered_at_means(&data)
            .unwrap();
        assert_eq!(spec.covariates()[0].center, 1.0);
    }

    #[test]
    fn assignments() {
        assert_eq!(parse_assignment("x=4").unwrap(), ("x".into(), 4.0));
        assert!(parse_assignment("x").is_err());
        assert!(parse_assignment("x=abc").is_err());
    }
}
