//! Distributions of effective sample sizes over a sample, development versus
//! validation comparison, and CSV export of plot data.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::glm::{Family, FittedModel};
use crate::linalg::Matrix;
use crate::neff::{predict, Annotation};

pub const QUANTILE_LEVELS: [f64; 9] = [1.0, 5.0, 10.0, 25.0, 50.0, 75.0, 90.0, 95.0, 99.0];
pub const DECILE_LEVELS: [f64; 9] = [10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0];
pub const DEFAULT_THRESHOLDS: [f64; 1] = [30.0];
pub const HISTOGRAM_BINS: usize = 30;
/// Upper edge of the last regular histogram bin, as a percentile.
pub const HISTOGRAM_UPPER_PERCENTILE: f64 = 99.5;
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Serializes +inf as `null` and reads `null` back as +inf.
pub(crate) mod inf_as_null {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() { Some(*v) } else { None }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }

    pub mod vec {
        use super::*;

        pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
            v.iter()
                .map(|x| if x.is_finite() { Some(*x) } else { None })
                .collect::<Vec<_>>()
                .serialize(s)
        }
    }

    pub mod opt_vec {
        use super::*;

        pub fn serialize<S: Serializer>(v: &Option<Vec<f64>>, s: S) -> Result<S::Ok, S::Error> {
            match v {
                Some(v) => vec::serialize(v, s),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<f64>>, D::Error> {
            Ok(Option::<Vec<Option<f64>>>::deserialize(d)?
                .map(|v| v.into_iter().map(|x| x.unwrap_or(f64::INFINITY)).collect()))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Quantile {
    pub level: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `HISTOGRAM_BINS + 1` edges from 0; empty when no finite values exist.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Finite values above the last edge.
    pub overflow: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCount {
    pub threshold: f64,
    /// Rows with n_eff strictly below `threshold`.
    pub count: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeffDistribution {
    pub n: usize,
    /// Type-7 quantiles of the finite values at [`QUANTILE_LEVELS`].
    pub quantiles: Vec<Quantile>,
    pub deciles: Vec<Quantile>,
    #[serde(with = "inf_as_null")]
    pub harmonic_mean: f64,
    pub histogram: Histogram,
    pub n_below: Vec<ThresholdCount>,
    /// Rows whose n_eff is +inf (boundary predictions).
    pub boundary_count: usize,
    /// Per-row values in input order. Not serialized.
    #[serde(skip)]
    pub values: Vec<f64>,
}

/// Type-7 quantile of sorted data, `level` in [0, 100].
pub fn quantile_sorted(sorted: &[f64], level: f64) -> f64 {
    let n = sorted.len();
    debug_assert!(n > 0);
    let h = (n - 1) as f64 * level / 100.0;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = h - lo as f64;
    if frac == 0.0 || sorted[lo] == sorted[hi] {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

impl NeffDistribution {
    pub fn quantile(&self, level: f64) -> Option<f64> {
        self.quantiles
            .iter()
            .chain(&self.deciles)
            .find(|q| q.level == level)
            .map(|q| q.value)
    }

    pub fn median(&self) -> Option<f64> {
        self.quantile(50.0)
    }

    pub fn count_below(&self, threshold: f64) -> Option<u64> {
        self.n_below.iter().find(|t| t.threshold == threshold).map(|t| t.count)
    }

    /// Same summary with a new threshold list; needs per-row values.
    pub fn with_thresholds(&self, thresholds: &[f64]) -> Result<Self> {
        summarize(&self.values, thresholds)
    }
}

pub fn summarize(values: &[f64], thresholds: &[f64]) -> Result<NeffDistribution> {
    if values.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(&bad) = values.iter().find(|v| v.is_nan() || **v <= 0.0) {
        return Err(Error::InvalidNeff(bad));
    }
    let mut finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    finite.sort_by(f64::total_cmp);
    let boundary_count = values.len() - finite.len();
    let n = values.len();

    let harmonic_mean = n as f64 / finite.iter().map(|v| 1.0 / v).sum::<f64>();

    let (quantiles, deciles, histogram) = if finite.is_empty() {
        (
            vec![],
            vec![],
            Histogram {
                edges: vec![],
                counts: vec![],
                overflow: 0,
            },
        )
    } else {
        let q = |levels: &[f64]| {
            levels
                .iter()
                .map(|&level| Quantile {
                    level,
                    value: quantile_sorted(&finite, level),
                })
                .collect::<Vec<_>>()
        };
        (q(&QUANTILE_LEVELS), q(&DECILE_LEVELS), histogram(&finite))
    };

    let n_below = thresholds
        .iter()
        .map(|&t| ThresholdCount {
            threshold: t,
            count: finite.partition_point(|v| *v < t) as u64,
        })
        .collect();

    Ok(NeffDistribution {
        n,
        quantiles,
        deciles,
        harmonic_mean,
        histogram,
        n_below,
        boundary_count,
        values: values.to_vec(),
    })
}

fn histogram(sorted: &[f64]) -> Histogram {
    let upper = quantile_sorted(sorted, HISTOGRAM_UPPER_PERCENTILE);
    let width = upper / HISTOGRAM_BINS as f64;
    let edges: Vec<f64> = (0..=HISTOGRAM_BINS)
        .map(|i| if i == HISTOGRAM_BINS { upper } else { i as f64 * width })
        .collect();
    let mut counts = vec![0u64; HISTOGRAM_BINS];
    let mut overflow = 0;
    for &v in sorted {
        if v > upper {
            overflow += 1;
        } else {
            let bin = ((v / width) as usize).min(HISTOGRAM_BINS - 1);
            counts[bin] += 1;
        }
    }
    Histogram {
        edges,
        counts,
        overflow,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuantileDelta {
    pub level: f64,
    pub dev: f64,
    pub val: f64,
    /// val − dev
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecileShare {
    pub level: f64,
    pub dev_value: f64,
    /// Share of validation rows strictly below this development decile.
    pub val_fraction_below: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub quantile_deltas: Vec<QuantileDelta>,
    /// Share of validation rows below the development 5th percentile.
    pub val_below_dev_p05: Option<f64>,
    pub decile_shares: Vec<DecileShare>,
    /// Every validation decile is at or below the matching development decile.
    pub val_deciles_not_above_dev: bool,
}

pub fn compare(dev: &NeffDistribution, val: &NeffDistribution) -> Comparison {
    let quantile_deltas = dev
        .quantiles
        .iter()
        .zip(&val.quantiles)
        .map(|(d, v)| QuantileDelta {
            level: d.level,
            dev: d.value,
            val: v.value,
            delta: v.value - d.value,
        })
        .collect();
    let share_below = |t: f64| {
        (!val.values.is_empty()).then(|| val.values.iter().filter(|v| **v < t).count() as f64 / val.values.len() as f64)
    };
    let decile_shares = dev
        .deciles
        .iter()
        .map(|d| DecileShare {
            level: d.level,
            dev_value: d.value,
            val_fraction_below: share_below(d.value),
        })
        .collect();
    let val_deciles_not_above_dev = dev.deciles.iter().zip(&val.deciles).all(|(d, v)| v.value <= d.value);
    Comparison {
        quantile_deltas,
        val_below_dev_p05: dev.quantile(5.0).and_then(share_below),
        decile_shares,
        val_deciles_not_above_dev,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovariateSummary {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

/// What a model file keeps about its development sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DevelopmentSummary {
    pub covariates: Vec<CovariateSummary>,
    pub thresholds: Vec<f64>,
    pub neff: NeffDistribution,
    /// Full sorted development n_eff, when the sample is small enough to store.
    #[serde(default, with = "inf_as_null::opt_vec", skip_serializing_if = "Option::is_none")]
    pub sorted_neff: Option<Vec<f64>>,
}

impl DevelopmentSummary {
    /// Percentage of development rows whose n_eff is at or below `n_eff`.
    ///
    /// Ties are judged with a relative tolerance of 1e-12 so that a
    /// development row queried again lands on its own value.
    pub fn percentile(&self, n_eff: f64) -> f64 {
        let cut = if n_eff.is_finite() {
            n_eff * (1.0 + 1e-12)
        } else {
            n_eff
        };
        if let Some(sorted) = &self.sorted_neff {
            if !sorted.is_empty() {
                let k = sorted.partition_point(|v| *v <= cut);
                return 100.0 * k as f64 / sorted.len() as f64;
            }
        }
        // Piecewise-linear through the stored quantiles.
        let qs = &self.neff.quantiles;
        let finite_share = 1.0 - self.neff.boundary_count as f64 / self.neff.n.max(1) as f64;
        match qs.first() {
            None => 0.0,
            _ if !n_eff.is_finite() => 100.0,
            Some(first) if cut < first.value => first.level * finite_share * (cut / first.value).max(0.0),
            _ => {
                let last = qs.last().expect("nonempty");
                if cut >= last.value {
                    return 100.0 * finite_share;
                }
                let i = qs.partition_point(|q| q.value <= cut);
                let (a, b) = (&qs[i - 1], &qs[i]);
                let t = if b.value > a.value {
                    (cut - a.value) / (b.value - a.value)
                } else {
                    1.0
                };
                (a.level + t * (b.level - a.level)) * finite_share
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sample {
    Dev,
    Val,
}

impl fmt::Display for Sample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sample::Dev => "dev",
            Sample::Val => "val",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowRecord {
    pub sample: Sample,
    /// 1-based row number in the source data.
    pub row_id: usize,
    pub yhat: f64,
    #[serde(with = "inf_as_null")]
    pub n_eff: f64,
    pub annotations: Vec<Annotation>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub schema_version: u32,
    pub model_name: String,
    pub family: Family,
    pub thresholds: Vec<f64>,
    pub dev: NeffDistribution,
    pub val: Option<NeffDistribution>,
    pub rows: Vec<RowRecord>,
    pub comparison: Option<Comparison>,
}

fn score_rows(model: &FittedModel, x: &Matrix, sample: Sample) -> Result<Vec<RowRecord>> {
    x.row_iter()
        .enumerate()
        .map(|(i, r)| {
            let p = predict(model, r)?;
            Ok(RowRecord {
                sample,
                row_id: i + 1,
                yhat: p.yhat,
                n_eff: p.n_eff,
                annotations: p.annotations,
            })
        })
        .collect()
}

impl ReportBundle {
    /// Scores the given development and validation designs. Without a
    /// development design the model's stored development summary is used.
    pub fn build(
        model: &FittedModel,
        dev_design: Option<&Matrix>,
        val_design: Option<&Matrix>,
        thresholds: &[f64],
    ) -> Result<Self> {
        let mut rows = vec![];
        let dev = match dev_design {
            Some(x) => {
                let r = score_rows(model, x, Sample::Dev)?;
                let values: Vec<f64> = r.iter().map(|r| r.n_eff).collect();
                rows.extend(r);
                summarize(&values, thresholds)?
            }
            None => {
                let stored = model.development.as_ref().ok_or(Error::EmptyInput)?;
                match &stored.sorted_neff {
                    Some(v) => summarize(v, thresholds)?,
                    None => stored.neff.clone(),
                }
            }
        };
        let val = match val_design {
            Some(x) => {
                let r = score_rows(model, x, Sample::Val)?;
                let values: Vec<f64> = r.iter().map(|r| r.n_eff).collect();
                rows.extend(r);
                Some(summarize(&values, thresholds)?)
            }
            None => None,
        };
        let comparison = val.as_ref().map(|v| compare(&dev, v));
        Ok(Self {
            schema_version: REPORT_SCHEMA_VERSION,
            model_name: model.name.clone(),
            family: model.family,
            thresholds: thresholds.to_vec(),
            dev,
            val,
            rows,
            comparison,
        })
    }

    pub fn rows_for(&self, sample: Sample) -> impl Iterator<Item = &RowRecord> {
        self.rows.iter().filter(move |r| r.sample == sample)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotKind {
    /// `cov1,cov2,yhat,n_eff` over a covariate grid.
    HeatmapGrid,
    /// `row_id,yhat,n_eff`
    NeffVsP,
    /// `sample,n_eff`
    DevValDensity,
    /// `sample,lower,upper,count`
    Histogram,
    /// `row_id,model,yhat,n_eff` for two models scored on the same rows.
    PairedModel,
}

impl FromStr for PlotKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "heatmap-grid" => PlotKind::HeatmapGrid,
            "neff-vs-p" => PlotKind::NeffVsP,
            "dev-val-density" => PlotKind::DevValDensity,
            "histogram" => PlotKind::Histogram,
            "paired-model" => PlotKind::PairedModel,
            other => return Err(Error::UnknownKind(other.to_string())),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridAxis {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl GridAxis {
    pub fn values(&self) -> Vec<f64> {
        let count = ((self.max - self.min) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| self.min + i as f64 * self.step).collect()
    }
}

impl FromStr for GridAxis {
    type Err = Error;

    /// `min:max:step`
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(':')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::InvalidGrid(format!("expected min:max:step, got `{s}`")))?;
        let [min, max, step] = parts[..] else {
            return Err(Error::InvalidGrid(format!("expected min:max:step, got `{s}`")));
        };
        if !(step > 0.0) || !(max >= min) || !min.is_finite() || !max.is_finite() {
            return Err(Error::InvalidGrid(format!("bad axis `{s}`")));
        }
        Ok(Self { min, max, step })
    }
}

#[derive(Clone, Debug, Default)]
pub struct PlotOptions<'a> {
    /// Needed for the heatmap grid.
    pub model: Option<&'a FittedModel>,
    /// One axis per covariate, in design order.
    pub grid: Vec<GridAxis>,
    /// Second model's bundle for [`PlotKind::PairedModel`].
    pub paired: Option<&'a ReportBundle>,
    /// Which rows feed row-level plots; defaults to validation when present.
    pub sample: Option<Sample>,
}

fn fmt_num(v: f64) -> String {
    format!("{v}")
}

pub fn emit_plot_data<W: Write>(
    bundle: &ReportBundle,
    kind: PlotKind,
    opts: &PlotOptions<'_>,
    mut out: W,
) -> Result<()> {
    let io = |e| Error::io("<plot output>", e);
    let sample = opts
        .sample
        .unwrap_or(if bundle.val.is_some() { Sample::Val } else { Sample::Dev });
    match kind {
        PlotKind::HeatmapGrid => {
            let model = opts
                .model
                .ok_or_else(|| Error::InvalidGrid("heatmap grid needs the model".into()))?;
            let covs = model.design.covariates();
            if !(1..=2).contains(&covs.len()) {
                return Err(Error::GridOnNonTwoCovariateModel(covs.len()));
            }
            if opts.grid.len() != covs.len() {
                return Err(Error::InvalidGrid(format!(
                    "need {} axes, got {}",
                    covs.len(),
                    opts.grid.len()
                )));
            }
            writeln!(out, "cov1,cov2,yhat,n_eff").map_err(io)?;
            let first = opts.grid[0].values();
            let second = opts.grid.get(1).map(GridAxis::values);
            let mut emit = |a: f64, b: Option<f64>| -> Result<()> {
                let mut rec = std::collections::BTreeMap::new();
                rec.insert(covs[0].name.as_str(), a);
                if let Some(b) = b {
                    rec.insert(covs[1].name.as_str(), b);
                }
                let p = predict(model, &model.design.encode(&rec)?)?;
                writeln!(
                    out,
                    "{},{},{},{}",
                    fmt_num(a),
                    b.map(fmt_num).unwrap_or_default(),
                    fmt_num(p.yhat),
                    fmt_num(p.n_eff)
                )
                .map_err(io)?;
                Ok(())
            };
            for &a in &first {
                match &second {
                    Some(bs) => {
                        for &b in bs {
                            emit(a, Some(b))?;
                        }
                    }
                    None => emit(a, None)?,
                }
            }
        }
        PlotKind::NeffVsP => {
            let rows: Vec<_> = bundle.rows_for(sample).collect();
            if rows.is_empty() {
                return Err(Error::EmptyInput);
            }
            writeln!(out, "row_id,yhat,n_eff").map_err(io)?;
            for r in rows {
                writeln!(out, "{},{},{}", r.row_id, fmt_num(r.yhat), fmt_num(r.n_eff)).map_err(io)?;
            }
        }
        PlotKind::DevValDensity => {
            let dists = [(Sample::Dev, Some(&bundle.dev)), (Sample::Val, bundle.val.as_ref())];
            if dists.iter().all(|(_, d)| d.is_none_or(|d| d.values.is_empty())) {
                return Err(Error::EmptyInput);
            }
            writeln!(out, "sample,n_eff").map_err(io)?;
            for (s, d) in dists {
                for v in d.map(|d| d.values.as_slice()).unwrap_or_default() {
                    writeln!(out, "{s},{}", fmt_num(*v)).map_err(io)?;
                }
            }
        }
        PlotKind::Histogram => {
            writeln!(out, "sample,lower,upper,count").map_err(io)?;
            for (s, d) in [(Sample::Dev, Some(&bundle.dev)), (Sample::Val, bundle.val.as_ref())] {
                let Some(d) = d else { continue };
                let h = &d.histogram;
                for (i, c) in h.counts.iter().enumerate() {
                    writeln!(out, "{s},{},{},{c}", fmt_num(h.edges[i]), fmt_num(h.edges[i + 1])).map_err(io)?;
                }
                if let Some(last) = h.edges.last() {
                    writeln!(out, "{s},{},inf,{}", fmt_num(*last), h.overflow).map_err(io)?;
                }
            }
        }
        PlotKind::PairedModel => {
            let other = opts
                .paired
                .ok_or_else(|| Error::InvalidGrid("paired plot needs a second bundle".into()))?;
            let a: Vec<_> = bundle.rows_for(sample).collect();
            let b: Vec<_> = other.rows_for(sample).collect();
            if a.is_empty() {
                return Err(Error::EmptyInput);
            }
            if a.len() != b.len() {
                return Err(Error::DimensionMismatch {
                    expected: a.len(),
                    got: b.len(),
                });
            }
            writeln!(out, "row_id,model,yhat,n_eff").map_err(io)?;
            for (ra, rb) in a.iter().zip(&b) {
                for (name, r) in [(&bundle.model_name, ra), (&other.model_name, rb)] {
                    writeln!(out, "{},{},{},{}", r.row_id, name, fmt_num(r.yhat), fmt_num(r.n_eff)).map_err(io)?;
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn summarize_d1_leverages() {
        let d = summarize(&[1.2, 3.0, 1.2], &[2.0]).unwrap();
        assert_relative_eq!(d.harmonic_mean, 1.5, epsilon = 1e-12);
        assert_eq!(d.count_below(2.0), Some(2));
        assert_eq!(d.n, 3);
        let binned: u64 = d.histogram.counts.iter().sum::<u64>() + d.histogram.overflow;
        assert_eq!(binned as usize + d.boundary_count, 3);
    }

    #[test]
    fn constant_values() {
        let d = summarize(&[7.0; 5], &DEFAULT_THRESHOLDS).unwrap();
        assert!(d.quantiles.iter().all(|q| q.value == 7.0));
        assert_relative_eq!(d.harmonic_mean, 7.0, epsilon = 1e-12);
        assert_eq!(d.histogram.counts.iter().sum::<u64>(), 5);
    }

    #[test]
    fn boundary_rows_are_counted_apart() {
        let d = summarize(&[2.0, f64::INFINITY, 4.0], &[3.0]).unwrap();
        assert_eq!(d.boundary_count, 1);
        let binned: u64 = d.histogram.counts.iter().sum::<u64>() + d.histogram.overflow;
        assert_eq!(binned, 2);
        // 3 / (1/2 + 1/4)
        assert_relative_eq!(d.harmonic_mean, 4.0, epsilon = 1e-12);
        assert_eq!(d.count_below(3.0), Some(1));
    }

    #[test]
    fn summarize_errors() {
        assert!(matches!(summarize(&[], &[]), Err(Error::EmptyInput)));
        assert!(matches!(summarize(&[1.0, -1.0], &[]), Err(Error::InvalidNeff(_))));
        assert!(matches!(summarize(&[f64::NAN], &[]), Err(Error::InvalidNeff(_))));
    }

    #[test]
    fn type7_quantiles() {
        let s = [10.0, 20.0, 30.0, 40.0];
        assert_eq!(quantile_sorted(&s, 50.0), 25.0);
        assert_eq!(quantile_sorted(&s, 0.0), 10.0);
        assert_eq!(quantile_sorted(&s, 100.0), 40.0);
        assert_relative_eq!(quantile_sorted(&s, 10.0), 13.0, epsilon = 1e-12);
    }

    #[test]
    fn compare_examples() {
        let dev = summarize(&[10.0, 20.0, 30.0, 40.0], &[]).unwrap();
        let same = compare(&dev, &dev);
        assert!(same.quantile_deltas.iter().all(|d| d.delta == 0.0));

        let val = summarize(&[5.0, 10.0, 15.0, 20.0], &[]).unwrap();
        let c = compare(&dev, &val);
        let median = c.quantile_deltas.iter().find(|d| d.level == 50.0).unwrap();
        assert_eq!(median.delta, -12.5);
        assert!(c.quantile_deltas.iter().all(|d| d.delta < 0.0));
        assert!(c.val_deciles_not_above_dev);
        // dev p05 = 11.5: only 5 and 10 are below
        assert_eq!(c.val_below_dev_p05, Some(0.5));
    }

    #[test]
    fn percentile_from_sorted_and_quantiles() {
        let neff = summarize(&[1.2, 3.0, 1.2], &[]).unwrap();
        let mut s = DevelopmentSummary {
            covariates: vec![],
            thresholds: vec![],
            neff,
            sorted_neff: Some(vec![1.2, 1.2, 3.0]),
        };
        assert_eq!(s.percentile(3.0), 100.0);
        assert_relative_eq!(s.percentile(1.2), 200.0 / 3.0, epsilon = 1e-12);
        assert_eq!(s.percentile(1.0), 0.0);
        s.sorted_neff = None;
        assert_eq!(s.percentile(3.0), 100.0);
        let mid = s.percentile(2.0);
        assert!(mid > 0.0 && mid < 100.0);
    }

    #[test]
    fn grid_axis_parsing() {
        let a: GridAxis = "0:2:1".parse().unwrap();
        assert_eq!(a.values(), vec![0.0, 1.0, 2.0]);
        let a: GridAxis = "0:1:0.1".parse().unwrap();
        assert_eq!(a.values().len(), 11);
        assert!("0:1".parse::<GridAxis>().is_err());
        assert!("0:1:0".parse::<GridAxis>().is_err());
        assert!("2:1:1".parse::<GridAxis>().is_err());
    }

    #[test]
    fn plot_kind_parsing() {
        assert_eq!("neff-vs-p".parse::<PlotKind>().unwrap(), PlotKind::NeffVsP);
        assert!(matches!("pie".parse::<PlotKind>(), Err(Error::UnknownKind(_))));
    }
}
