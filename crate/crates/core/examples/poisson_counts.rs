//! A Poisson log-linear model for event counts. The same n_eff definition
//! applies: Var(Y | x) over the delta-method variance of the fitted mean.

use neff::{fit_irls, predict, Family, Matrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

fn main() -> neff::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let exposure = Normal::new(0.0, 1.0).unwrap();
    let n = 300;
    let x = Matrix::from_fn(n, 2, |_, j| if j == 0 { 1.0 } else { exposure.sample(&mut rng) });
    let y: Vec<f64> = x
        .row_iter()
        .map(|r| Poisson::new((0.7 + 0.4 * r[1]).exp()).unwrap().sample(&mut rng))
        .collect();

    let model = fit_irls(&x, &y, Family::Poisson)?;
    println!("beta = {:.3?}, deviance = {:.2}", model.beta, model.deviance);
    for z in [-2.0, 0.0, 2.0, 4.0] {
        let p = predict(&model, &[1.0, z])?;
        println!("z = {z:>4}: mean count {:.2}, n_eff {:.1}", p.yhat, p.n_eff);
    }
    Ok(())
}
