//! Compares a small and a large model on the same patients. Adding predictors
//! lowers n_eff for nearly everyone; the paired-model CSV lets a plot connect
//! each patient's two values.

use neff::report::{emit_plot_data, PlotKind, PlotOptions, ReportBundle};
use neff::{fit_irls, Family, Matrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Bernoulli, Distribution, StandardNormal};

fn main() -> neff::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let n = 600;
    let big = Matrix::from_fn(n, 9, |_, j| if j == 0 { 1.0 } else { StandardNormal.sample(&mut rng) });
    let y: Vec<f64> = big
        .row_iter()
        .map(|r| {
            let eta = -2.0 + 0.6 * r[1] + 0.4 * r[2] + 0.2 * r[5];
            f64::from(u8::from(
                Bernoulli::new(Family::Binomial.inverse_link(eta))
                    .unwrap()
                    .sample(&mut rng),
            ))
        })
        .collect();
    let small = Matrix::from_fn(n, 3, |i, j| big[(i, j)]);

    let small_fit = fit_irls(&small, &y, Family::Binomial)?.with_name("2 predictors");
    let big_fit = fit_irls(&big, &y, Family::Binomial)?.with_name("8 predictors");
    let a = ReportBundle::build(&small_fit, Some(&small), None, &[30.0])?;
    let b = ReportBundle::build(&big_fit, Some(&big), None, &[30.0])?;
    println!(
        "median dev n_eff: 2 predictors {:.1}, 8 predictors {:.1}",
        a.dev.median().unwrap_or(f64::NAN),
        b.dev.median().unwrap_or(f64::NAN)
    );

    let mut csv = vec![];
    emit_plot_data(
        &a,
        PlotKind::PairedModel,
        &PlotOptions {
            paired: Some(&b),
            ..Default::default()
        },
        &mut csv,
    )?;
    let text = String::from_utf8_lossy(&csv);
    for line in text.lines().take(7) {
        println!("{line}");
    }
    Ok(())
}
