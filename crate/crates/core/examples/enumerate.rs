//! Enumerate two-point graphs with two aerial vertices and apply the six
//! symmetric operators to the coordinates `a` and `d`.

use kstar::exactmath::{Poly, Trunc, ORDINARY};
use kstar::graphs::{class_counts, enumerate_graphs, symmetric_basis};
use kstar::solver::symmetric_values;
use kstar::poisson::ordinary_tensor;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for generalized in [false, true] {
        let classes = enumerate_graphs(2, 2, generalized)?;
        println!("generalized = {generalized}: {} classes", classes.len());
        for c in &classes {
            println!("  {}  ({} members, mirror sign {})", c.representative.render(), c.members.len(), c.mirror_sign);
        }
        println!("  {:?}", class_counts(2, 2, generalized)?);
    }
    let a = Trunc::exact(Poly::var(ORDINARY, 0));
    let d = Trunc::exact(Poly::var(ORDINARY, 3));
    let values = symmetric_values(&ordinary_tensor(), &a, &d, 2)?;
    for (s, v) in symmetric_basis().iter().zip(values) {
        println!("{}(a,d) = {}", s.label, v.poly.render());
    }
    Ok(())
}
