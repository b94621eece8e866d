//! Expand the quantum-group product of coordinate functions, check its
//! axioms and read off the first two cochains in both charts.

use kstar::exactmath::{EXPONENTIAL, ORDINARY};
use kstar::takhtajan::{check_axioms, extract_cochains, star_table};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let order: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let table = star_table(order)?;
    for ((u, v), s) in table.products() {
        println!("{}*{} = {}", ORDINARY.vars[*u], ORDINARY.vars[*v], s.render().join(" | "));
    }
    for c in check_axioms(&table).checks {
        println!("{:<14} {}  {}", c.name, if c.ok { "ok" } else { "VIOLATED" }, c.detail);
    }
    for chart in [ORDINARY, EXPONENTIAL] {
        let c = extract_cochains(&table, chart)?;
        println!("symmetric second-order cochain in {} coordinates:", chart.name);
        for ((u, v), t) in c.ct.iter().filter(|((u, v), _)| u <= v) {
            println!("  C_T({},{}) = {}", ORDINARY.vars[*u], ORDINARY.vars[*v], t.poly.render());
        }
    }
    Ok(())
}
