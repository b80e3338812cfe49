//! Risk and n_eff over an age x shock grid for a two-covariate model, printed
//! as the CSV that the heatmap plot consumes.

use neff::pipeline::{fit_dataset, FitSettings};
use neff::report::{emit_plot_data, GridAxis, PlotKind, PlotOptions, ReportBundle};
use neff::{CovariateSpec, Dataset, DesignSpec, Family, IrlsOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Bernoulli, Distribution, Normal};

fn main() -> neff::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let n = 1200;
    let ages = Normal::new(61.0, 11.0).unwrap();
    let age: Vec<f64> = (0..n).map(|_| ages.sample(&mut rng)).collect();
    let shock: Vec<f64> = (0..n)
        .map(|_| f64::from(u8::from(rng.random::<f64>() < 0.025)))
        .collect();
    let y: Vec<f64> = age
        .iter()
        .zip(&shock)
        .map(|(a, s)| {
            let p = Family::Binomial.inverse_link(-3.0 + 0.08 * (a - 61.0) + 2.5 * s);
            f64::from(u8::from(Bernoulli::new(p).unwrap().sample(&mut rng)))
        })
        .collect();
    let data = Dataset::from_columns(vec![("age", age), ("shock", shock), ("y", y)])?;
    let spec = DesignSpec::new(vec![
        CovariateSpec::continuous("age", 0.0),
        CovariateSpec::binary("shock"),
    ])?
    .centered_at_means(&data)?;
    let settings = FitSettings {
        name: "age-shock".into(),
        family: Family::Binomial,
        outcome: "y".into(),
        thresholds: vec![30.0],
        irls: IrlsOptions::default(),
    };
    let model = fit_dataset(&data, spec, &settings)?;

    let bundle = ReportBundle::build(&model, None, None, &[30.0])?;
    let opts = PlotOptions {
        model: Some(&model),
        grid: vec!["40:90:10".parse::<GridAxis>()?, "0:1:1".parse()?],
        ..Default::default()
    };
    emit_plot_data(&bundle, PlotKind::HeatmapGrid, &opts, std::io::stdout().lock())
}
