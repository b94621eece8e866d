//! Solve the order-2 graph weights exactly and cross-check them by Monte Carlo.

use kstar::exactmath::fmt_rat;
use kstar::kontsevich::{solve_weights, to_f64, weight_estimate};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let samples: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1_000_000);
    let solved = solve_weights()?;
    for (i, (k, q)) in solved.pinned.iter().enumerate() {
        println!("pinned {i}: {} quadrature {:.10} (+- {:.1e})", solved.classes[*k].representative.render(), q.value, q.error);
    }
    for c in &solved.classes {
        let w = &solved.weights[&c.representative];
        let est = weight_estimate(&c.representative, samples, 1)?;
        let z = (est.estimate - to_f64(w)) / est.std_error;
        println!(
            "{:<40} exact {:>6}  mc {:+.6} +- {:.1e}  z {:+.2}  snapped {}",
            c.representative.render(),
            fmt_rat(w),
            est.estimate,
            est.std_error,
            z,
            est.snapped.as_ref().map(fmt_rat).unwrap_or_else(|| "-".into())
        );
    }
    Ok(())
}
