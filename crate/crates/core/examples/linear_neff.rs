//! n_eff for a least-squares fit: three points on a line, then one query
//! far outside them.

use neff::{fit_ols, neff_linear, Matrix};

fn main() -> neff::Result<()> {
    let x = Matrix::from_rows(&[[1.0, 0.0], [1.0, 1.0], [1.0, 2.0]]);
    let model = fit_ols(&x, &[0.0, 0.0, 3.0])?;
    println!("beta = {:?}, sigma^2 = {}", model.beta, model.dispersion);

    for at in [0.0, 1.0, 2.0, 4.0] {
        let p = neff_linear(&model, &[1.0, at])?;
        let notes: Vec<_> = p.annotations.iter().map(|a| a.as_str()).collect();
        println!("x = {at}: yhat = {:.3}, n_eff = {:.4} {notes:?}", p.yhat, p.n_eff);
    }
    // x = 1 sits at the mean, where all three points count fully;
    // x = 4 is worth less than one patient.
    Ok(())
}
