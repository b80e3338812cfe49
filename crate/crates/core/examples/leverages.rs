//! Development-row n_eff is 1/leverage, so the harmonic mean over the
//! development sample is always n/p. Rare subgroups stand out: a row in a
//! subgroup of m patients never gets n_eff above m.

use neff::{fit_ols, leverages, summarize, Matrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn main() -> neff::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 1000;
    let x = Matrix::from_fn(n, 3, |_, j| match j {
        0 => 1.0,
        1 => StandardNormal.sample(&mut rng),
        _ => f64::from(u8::from(rng.random::<f64>() < 0.028)),
    });
    let y: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let model = fit_ols(&x, &y)?;

    let lev = leverages(&model, &x)?;
    println!("sum of leverages = {:.6} (p = {})", lev.trace(), model.p());
    println!(
        "harmonic mean n_eff = {:.3} (n/p = {:.3})",
        lev.harmonic_mean_neff(),
        n as f64 / 3.0
    );

    let n_eff = lev.n_eff();
    let (rare, common): (Vec<_>, Vec<_>) = x.row_iter().zip(&n_eff).partition(|(r, _)| r[2] == 1.0);
    let range = |v: &[(&[f64], &f64)]| {
        v.iter()
            .fold((f64::INFINITY, 0.0_f64), |(lo, hi), (_, &e)| (lo.min(e), hi.max(e)))
    };
    println!("subgroup of {}: n_eff range {:.1?}", rare.len(), range(&rare));
    println!("everyone else:  n_eff range {:.1?}", range(&common));

    let dist = summarize(&n_eff, &[30.0, 100.0])?;
    for t in &dist.n_below {
        println!("rows with n_eff below {}: {}", t.threshold, t.count);
    }
    Ok(())
}
