//! Yang-Baxter defect of the r-matrix, the quadratic bracket it induces and
//! its form in logarithm coordinates.

use kstar::exactmath::{Poly, ORDINARY};
use kstar::liealg::{cybe_defect, r_bracket, r_tilde};
use kstar::poisson::{exp_chart_tensor, jacobi_holds, ordinary_tensor};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let r = r_tilde();
    println!("r = {}", r.render());
    let d = cybe_defect(&r);
    println!("I123 = {}", d.i123.render());
    println!("alternating {}, invariant {}", d.alternating, d.invariant);

    let x = Poly::vars(ORDINARY);
    for i in 0..4 {
        for j in i + 1..4 {
            let b = r_bracket(&r.flip(), &x[i], &x[j])?;
            println!("{{{},{}}} = {}", ORDINARY.vars[i], ORDINARY.vars[j], b.render());
        }
    }
    println!("Jacobi (matrix coordinates): {}", jacobi_holds(&ordinary_tensor()));

    let lam = exp_chart_tensor(3)?;
    println!("logarithm coordinates, trusted through degree {}:", lam.trust());
    println!("{}", serde_json::to_string_pretty(&lam.to_json())?);
    println!("Jacobi (logarithm coordinates): {}", jacobi_holds(&lam));
    Ok(())
}
