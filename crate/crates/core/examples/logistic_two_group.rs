//! Two groups of ten: 3/10 and 5/10 events. Each group's prediction is just its
//! own event rate, so n_eff comes out as exactly the group size.

use neff::{fit_irls, neff_glm, Family, Matrix};

fn main() -> neff::Result<()> {
    let mut rows = vec![];
    let mut y = vec![];
    for (group, events) in [(0.0, 3), (1.0, 5)] {
        for k in 0..10 {
            rows.push([1.0, group]);
            y.push(if k < events { 1.0 } else { 0.0 });
        }
    }
    let model = fit_irls(&Matrix::from_rows(&rows), &y, Family::Binomial)?;
    println!("beta = {:?} after {} iterations", model.beta, model.iterations);
    for group in [0.0, 1.0] {
        let p = neff_glm(&model, &[1.0, group])?;
        println!(
            "group {group}: risk {:.2}, se {:.4}, n_eff {:.6}",
            p.yhat, p.se_pred, p.n_eff
        );
    }
    Ok(())
}
