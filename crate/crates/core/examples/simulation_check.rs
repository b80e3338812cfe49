//! Checks the delta-method n_eff against a resimulation estimate: draw new
//! outcomes from the fitted model, refit, and measure how much the prediction
//! moves. Replicates are seeded per index, so the result is reproducible.

use neff::{fit_irls, neff_glm, neff_simulated, Family, Matrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Bernoulli, Distribution, StandardNormal};

fn main() -> neff::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 1000;
    let x = Matrix::from_fn(n, 3, |_, j| if j == 0 { 1.0 } else { StandardNormal.sample(&mut rng) });
    let y: Vec<f64> = x
        .row_iter()
        .map(|r| {
            let p = Family::Binomial.inverse_link(-2.0 + r[1] + 0.5 * r[2]);
            f64::from(u8::from(Bernoulli::new(p).unwrap().sample(&mut rng)))
        })
        .collect();
    let model = fit_irls(&x, &y, Family::Binomial)?;

    for q in [[1.0, 0.0, 0.0], [1.0, 1.5, 0.5], [1.0, 2.5, 1.0]] {
        let delta = neff_glm(&model, &q)?;
        let sim = neff_simulated(&model, &x, &q, 400, 20240101)?;
        println!(
            "risk {:.3}: delta n_eff {:7.1}, simulated {:7.1} ({} replicates, {} dropped)",
            delta.yhat, delta.n_eff, sim.n_eff, sim.replicates, sim.dropped
        );
    }
    Ok(())
}
