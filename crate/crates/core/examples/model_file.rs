//! Fit from a CSV, save the model file, load it back and predict. Predictions
//! from the loaded model are bit-identical to the original's.

use std::collections::BTreeMap;

use neff::pipeline::{fit_dataset, predict_record, FitSettings};
use neff::{read_csv, store, CovariateSpec, DesignSpec, Family, IrlsOptions};

const DATA: &str = "age,shock,DAY30
52,0,0
61,0,0
70,1,1
45,0,0
66,0,1
58,1,0
73,0,1
49,0,0
64,1,1
55,0,0
68,0,0
60,0,1
";

fn main() -> neff::Result<()> {
    let dir = tempfile::tempdir().map_err(|e| neff::Error::io("tempdir", e))?;
    let csv = dir.path().join("dev.csv");
    std::fs::write(&csv, DATA).map_err(|e| neff::Error::io(&csv, e))?;

    let data = read_csv(&csv, &["age", "shock", "DAY30"])?;
    let spec = DesignSpec::new(vec![
        CovariateSpec::continuous("age", 0.0),
        CovariateSpec::binary("shock"),
    ])?
    .centered_at_means(&data)?;
    let settings = FitSettings {
        name: "age-shock".into(),
        family: Family::Binomial,
        outcome: "DAY30".into(),
        thresholds: vec![5.0],
        irls: IrlsOptions::default(),
    };
    let model = fit_dataset(&data, spec, &settings)?;

    let path = dir.path().join("age-shock.json");
    store::save(&model, &path, false)?;
    let loaded = store::load(&path)?;
    assert_eq!(loaded, model);

    let patient = BTreeMap::from([("age", 67.0), ("shock", 1.0)]);
    let a = predict_record(&model, &patient)?;
    let b = predict_record(&loaded, &patient)?;
    assert_eq!(a.n_eff.to_bits(), b.n_eff.to_bits());
    println!(
        "risk {} in 100, effectively based on {} patients like this one (dev percentile {:.0})",
        a.per_hundred.unwrap_or_default(),
        a.n_eff_display,
        a.dev_percentile.unwrap_or(f64::NAN)
    );
    Ok(())
}
