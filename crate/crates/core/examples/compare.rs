//! Assemble both coefficient-matching systems and decide them exactly.

use kstar::exactmath::{fmt_rat, Trunc};
use kstar::kontsevich::{order2_product, solve_weights};
use kstar::poisson::{exp_chart_functions, exp_chart_tensor, ordinary_tensor};
use kstar::reference;
use kstar::solver::{
    assemble_exponential_system, assemble_ordinary_system, contradictory_pairs, in_row_space, solve_or_certificate,
    verify_certificate, LinSystem, Outcome,
};
use kstar::takhtajan::star_table;

fn show(name: &str, sys: &LinSystem) {
    println!("== {name}: {} rows", sys.len());
    match solve_or_certificate(sys) {
        Outcome::Solution(s) => println!(
            "feasible, nullity {}: {}",
            s.nullity,
            s.assignment.iter().zip(&sys.unknowns).map(|(x, u)| format!("{u}={}", fmt_rat(x))).collect::<Vec<_>>().join(" ")
        ),
        Outcome::Infeasible(c) => {
            println!("infeasible, certificate verified: {}, combined rhs {}", verify_certificate(sys, &c), fmt_rat(&c.combined_rhs));
            for (i, m) in c.multipliers.iter().enumerate().filter(|(_, m)| !num_traits::Zero::is_zero(*m)) {
                let r = &sys.rows()[i];
                println!("  {:>6} x [{}]  from {}", fmt_rat(m), sys.render_row(r), r.provenance[0].render());
            }
        }
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let table = star_table(2)?;

    let images: [Trunc; 4] = exp_chart_functions(3)?.map(|s| s.coeff_trunc(0));
    let lam = exp_chart_tensor(3)?;
    let sys = assemble_exponential_system(&lam, &images, &table)?;
    show("exponential (computed tensor)", &sys);
    for (i, r) in reference::exponential_rows().iter().enumerate() {
        println!("  quoted row {} in row space: {}", i + 1, in_row_space(&sys, &r.coeffs, &r.rhs));
    }
    let qsys = assemble_exponential_system(&reference::exp_tensor(), &images, &table)?;
    show("exponential (quoted tensor)", &qsys);
    for (i, r) in reference::exponential_rows().iter().enumerate() {
        println!("  quoted row {} in row space: {}", i + 1, in_row_space(&qsys, &r.coeffs, &r.rhs));
    }

    let weights = solve_weights()?;
    let kstar = order2_product(&ordinary_tensor(), &weights.weights)?;
    let osys = assemble_ordinary_system(&kstar, &table)?;
    show("ordinary", &osys);
    for (i, j, gap) in contradictory_pairs(&osys) {
        println!("  contradictory: [{}] vs [{}] gap {}", osys.render_row(&osys.rows()[i]), osys.render_row(&osys.rows()[j]), fmt_rat(&gap));
    }
    for (i, r) in reference::ordinary_rows().iter().enumerate() {
        println!("  quoted row {} in row space: {}", i + 1, in_row_space(&osys, &r.coeffs, &r.rhs));
    }
    Ok(())
}
