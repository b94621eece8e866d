//! Matrix exponential and logarithm as truncated coordinate changes, checked
//! by composing them.

use kstar::exactmath::{compose, Poly, EXPONENTIAL, ORDINARY};
use kstar::poisson::{exp_matrix_polys, log_series};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let deg = 4;
    let exp = exp_matrix_polys(deg);
    for (v, p) in ORDINARY.vars.iter().zip(&exp) {
        println!("{v} = {}", p.render());
    }
    let log = log_series(deg)?;
    for (v, p) in EXPONENTIAL.vars.iter().zip(&log) {
        println!("{v} = {}", p.render());
    }
    // log(exp(X)) = X through the chosen degree; `log` is written in the
    // shifted coordinates a-1, b, c, d-1.
    let shifted: Vec<Poly> = (0..4)
        .map(|k| if k == 0 || k == 3 { &exp[k] - Poly::one(EXPONENTIAL) } else { exp[k].clone() })
        .collect();
    for (k, l) in log.iter().enumerate() {
        let back = compose(l, &shifted, EXPONENTIAL, deg);
        println!("log(exp X)_{} = {}", EXPONENTIAL.vars[k], back.render());
    }
    Ok(())
}
