//! Parametric resimulation estimate of the effective sample size.
//!
//! This is a verification tool for the closed-form delta-method values: new
//! outcomes are drawn from the fitted model at every development row, the same
//! family is refitted, and the spread of the refitted predictions at `x_new`
//! is compared with the conditional outcome variance there.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Bernoulli, Distribution, Normal, Poisson};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::glm::{fit, Family, FittedModel, IrlsOptions};
use crate::linalg::{dot, Matrix};

pub const MIN_REPLICATES: usize = 100;
/// Fraction of replicates allowed to fail before the estimate is rejected.
pub const MAX_DROP_FRACTION: f64 = 0.05;

#[derive(Clone, Debug, PartialEq)]
pub struct SimulatedNeff {
    pub n_eff: f64,
    /// Empirical variance of the refitted predictions.
    pub var_pred: f64,
    pub cond_var: f64,
    pub replicates: usize,
    pub dropped: usize,
}

/// Replicate `b` draws from its own ChaCha stream `(seed, b)`, so the result
/// does not depend on how replicates are scheduled across threads.
pub fn neff_simulated(
    model: &FittedModel,
    x_dev: &Matrix,
    x_new: &[f64],
    replicates: usize,
    seed: u64,
) -> Result<SimulatedNeff> {
    if replicates < MIN_REPLICATES {
        return Err(Error::TooFewReplicates {
            min: MIN_REPLICATES,
            got: replicates,
        });
    }
    if x_dev.cols() != model.p() || x_new.len() != model.p() {
        return Err(Error::DimensionMismatch {
            expected: model.p(),
            got: if x_dev.cols() != model.p() {
                x_dev.cols()
            } else {
                x_new.len()
            },
        });
    }
    let fam = model.family;
    if fam == Family::Gaussian && model.dispersion <= 0.0 {
        return Err(Error::DegenerateDispersion);
    }
    let mu: Vec<f64> = x_dev
        .row_iter()
        .map(|r| fam.inverse_link(dot(r, &model.beta)))
        .collect();
    let yhat_new = fam.inverse_link(dot(x_new, &model.beta));
    let cond_var = fam.variance(yhat_new, model.dispersion);
    let sd = model.dispersion.sqrt();
    let opts = IrlsOptions::default();

    let draws: Vec<Option<f64>> = (0..replicates)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let y: Vec<f64> = mu
                .iter()
                .map(|&m| match fam {
                    Family::Gaussian => Normal::new(m, sd).expect("finite sd").sample(&mut rng),
                    Family::Binomial => f64::from(u8::from(Bernoulli::new(m).expect("p in [0,1]").sample(&mut rng))),
                    Family::Poisson if m > 0.0 => Poisson::new(m).map_or(0.0, |d| d.sample(&mut rng)),
                    Family::Poisson => 0.0,
                })
                .collect();
            let refit = fit(x_dev, &y, fam, &opts).ok()?;
            refit
                .converged
                .then(|| fam.inverse_link(dot(x_new, &refit.beta)))
                .filter(|v| v.is_finite())
        })
        .collect();

    let kept: Vec<f64> = draws.into_iter().flatten().collect();
    let dropped = replicates - kept.len();
    if dropped as f64 > MAX_DROP_FRACTION * replicates as f64 || kept.len() < 2 {
        return Err(Error::ResimulationNotConverged {
            dropped,
            total: replicates,
        });
    }
    let k = kept.len() as f64;
    let mean = kept.iter().sum::<f64>() / k;
    let var_pred = kept.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0);
    Ok(SimulatedNeff {
        n_eff: cond_var / var_pred,
        var_pred,
        cond_var,
        replicates,
        dropped,
    })
}
