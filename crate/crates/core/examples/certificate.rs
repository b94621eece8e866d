//! Decide a small rational system and print a checkable infeasibility
//! certificate.

use kstar::exactmath::{fmt_rat, rat};
use kstar::solver::{ints, solve_or_certificate, verify_certificate, LinSystem, Outcome};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut sys = LinSystem::new(&["x", "y", "z"]);
    sys.push(ints(&[1, 2, 0]), rat(1, 2), None)?;
    sys.push(ints(&[0, 1, 1]), rat(1, 3), None)?;
    sys.push(ints(&[1, 4, 2]), rat(1, 1), None)?;
    for r in sys.rows() {
        println!("{}", sys.render_row(r));
    }
    match solve_or_certificate(&sys) {
        Outcome::Solution(s) => println!("solution {:?}", s.assignment.iter().map(fmt_rat).collect::<Vec<_>>()),
        Outcome::Infeasible(c) => {
            println!("multipliers {:?}", c.multipliers.iter().map(fmt_rat).collect::<Vec<_>>());
            println!("combined: 0 = {}", fmt_rat(&c.combined_rhs));
            println!("verified {}", verify_certificate(&sys, &c));
        }
    }
    Ok(())
}
