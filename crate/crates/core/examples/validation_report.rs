//! Development vs external validation: fit on one sample, score another drawn
//! from an older population, and compare the two n_eff distributions. Also
//! writes the plot-data CSVs into a temporary directory.

use neff::report::{emit_plot_data, PlotKind, PlotOptions, ReportBundle};
use neff::{fit_irls, Family, Matrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Bernoulli, Distribution, Normal};

fn sample(rng: &mut ChaCha8Rng, n: usize, age_mean: f64) -> (Matrix, Vec<f64>) {
    let age = Normal::new(age_mean, 1.0).unwrap();
    let x = Matrix::from_fn(n, 2, |_, j| if j == 0 { 1.0 } else { age.sample(rng) });
    let y = x
        .row_iter()
        .map(|r| {
            let p = Family::Binomial.inverse_link(-2.5 + 0.8 * r[1]);
            f64::from(u8::from(Bernoulli::new(p).unwrap().sample(rng)))
        })
        .collect();
    (x, y)
}

fn main() -> neff::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let (dev_x, dev_y) = sample(&mut rng, 800, 0.0);
    let (val_x, _) = sample(&mut rng, 500, 1.0);
    let model = fit_irls(&dev_x, &dev_y, Family::Binomial)?;

    let bundle = ReportBundle::build(&model, Some(&dev_x), Some(&val_x), &[30.0, 100.0])?;
    let val = bundle.val.as_ref().expect("validation scored");
    println!(
        "harmonic mean n_eff: dev {:.1}, val {:.1}",
        bundle.dev.harmonic_mean, val.harmonic_mean
    );
    for d in &bundle.comparison.as_ref().expect("comparison").quantile_deltas {
        println!("  p{:<4} val - dev = {:+.1}", d.level, d.delta);
    }

    let dir = tempfile::tempdir().map_err(|e| neff::Error::io("tempdir", e))?;
    for (kind, file) in [
        (PlotKind::NeffVsP, "neff_vs_p.csv"),
        (PlotKind::DevValDensity, "density.csv"),
        (PlotKind::Histogram, "histogram.csv"),
    ] {
        let path = dir.path().join(file);
        let out = std::fs::File::create(&path).map_err(|e| neff::Error::io(&path, e))?;
        emit_plot_data(&bundle, kind, &PlotOptions::default(), out)?;
        let lines = std::fs::read_to_string(&path)
            .map_err(|e| neff::Error::io(&path, e))?
            .lines()
            .count();
        println!("{file}: {lines} lines");
    }
    Ok(())
}
