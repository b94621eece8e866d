//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria that do not hold are reported as FAIL with the offending objects;
//! the test itself only fails if the pipeline cannot run.

use kstar::cli::{self, ChartArg, Cli, Command, Format};
use kstar::exactmath::{fmt_rat, int, rat, Poly, Trunc, EXPONENTIAL, ORDINARY};
use kstar::graphs::{class_counts, classify, enumerate_graphs, symmetric_basis, KGraph};
use kstar::kontsevich::{associativity_defect, order2_product, solve_weights, to_f64, weight_estimate};
use kstar::liealg::{cybe_defect, r_bracket, r_tilde};
use kstar::poisson::{exp_chart_functions, exp_chart_tensor, jacobi_defect, ordinary_tensor};
use kstar::reference;
use kstar::solver::{
    assemble_exponential_system, assemble_ordinary_system, contradictory_pairs, forward_substitute, in_row_space,
    solve_or_certificate, symmetric_values, verify_certificate, Outcome, EXP_UNKNOWNS, ORD_UNKNOWNS,
};
use kstar::takhtajan::{check_axioms, extract_cochains, star_table};
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::Write;
use std::time::{Duration, Instant};

// Written to the process stdout handle so the lines survive libtest's capture.
macro_rules! out {
    ($($arg:tt)*) => {{
        let mut h = std::io::stdout().lock();
        let _ = writeln!(h, $($arg)*);
    }};
}

struct Line {
    id: usize,
    title: &'static str,
    ok: bool,
    flags: Vec<String>,
    detail: Vec<String>,
    elapsed: Duration,
    budget: Duration,
}

impl Line {
    fn print(&self) {
        let within = self.elapsed <= self.budget;
        let status = if self.ok && within { "PASS" } else { "FAIL" };
        out!(
            "{status} {}. {} ({:.2}s, budget {}s){}",
            self.id,
            self.title,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs(),
            if self.flags.is_empty() { String::new() } else { format!(" [flagged: {}]", self.flags.len()) }
        );
        for d in &self.detail {
            out!("      {d}");
        }
        for f in &self.flags {
            out!("      flag: {f}");
        }
        if !within {
            out!("      over runtime budget");
        }
    }
}

fn timed(
    id: usize,
    title: &'static str,
    budget_s: u64,
    f: impl FnOnce(&mut Vec<String>, &mut Vec<String>) -> bool,
) -> Line {
    let start = Instant::now();
    let mut detail = Vec::new();
    let mut flags = Vec::new();
    let ok = f(&mut detail, &mut flags);
    Line {
        id,
        title,
        ok,
        flags,
        detail,
        elapsed: start.elapsed(),
        budget: Duration::from_secs(budget_s),
    }
}

fn ordinary(s: &str) -> Poly {
    Poly::parse(ORDINARY, s).unwrap()
}

fn criterion_1() -> Line {
    timed(1, "Poisson-Lie structure: six quadratic relations, Jacobi in matrix coordinates", 1, |d, flags| {
        let expected = [
            ("a", "b", "a*b"),
            ("a", "c", "a*c"),
            ("b", "c", "0"),
            ("b", "d", "b*d"),
            ("c", "d", "c*d"),
            ("a", "d", "2*b*c"),
        ];
        let flipped = r_tilde().flip();
        let mut ok = true;
        let mut negated = 0;
        for (f, g, e) in expected {
            let got = r_bracket(&flipped, &ordinary(f), &ordinary(g)).unwrap();
            let literal = r_bracket(&r_tilde(), &ordinary(f), &ordinary(g)).unwrap();
            if literal == -ordinary(e) && !ordinary(e).is_zero() {
                negated += 1;
            }
            if got != ordinary(e) {
                ok = false;
                d.push(format!("{{{f},{g}}} = {} vs {e}", got.render()));
            }
        }
        if negated > 0 {
            flags.push(format!(
                "r as given yields the negated bracket on {negated} nonzero relations; the opposite orientation reproduces all six"
            ));
        }
        let jac = jacobi_defect(&ordinary_tensor());
        let nonzero: Vec<_> = jac.iter().filter(|(_, t)| !t.poly.is_zero()).collect();
        if !nonzero.is_empty() {
            ok = false;
            d.push(format!("Jacobi defect nonzero on {} triples", nonzero.len()));
        }
        d.push(format!("six relations exact; Jacobi defect zero on {} triples", jac.len()));
        ok
    })
}

fn criterion_2() -> Line {
    timed(2, "Modified CYBE: nonzero, alternating, invariant defect", 1, |d, _| {
        let c = cybe_defect(&r_tilde());
        d.push(format!("I123 = {}", c.i123.render()));
        !c.i123.is_zero() && c.alternating && c.invariant && c.i123.is_alternating() && c.i123.is_invariant()
    })
}

fn criterion_3() -> Line {
    timed(3, "Quantum-group product: relations, bracket, coproduct, associativity through t^2", 10, |d, flags| {
        let table = star_table(2).unwrap();
        let rels = reference::star_relations(2).unwrap();
        let mut ok = true;
        for (u, v, s) in &rels {
            if table.product(*u, *v) != s {
                ok = false;
                d.push(format!("{}*{}: {:?} vs {:?}", ORDINARY.vars[*u], ORDINARY.vars[*v], table.product(*u, *v).render(), s.render()));
            }
        }
        if rels.len() != 9 {
            flags.push(format!("{} ordered-product relations (x*x for four coordinates, four half-angle pairs, b*c, a*d); nine expected", rels.len()));
        }
        for c in check_axioms(&table).checks {
            d.push(format!("{}: {} ({})", c.name, if c.ok { "ok" } else { "violated" }, c.detail));
            ok &= c.ok;
        }
        ok
    })
}

fn criterion_4() -> Line {
    timed(4, "Logarithm chart: tensor through degree 3, six golden values, C_T(a,d) = 0", 30, |d, _| {
        let lam = exp_chart_tensor(3).unwrap();
        let quoted = reference::exp_tensor();
        let mut ok = true;
        for i in 0..4 {
            for j in i + 1..4 {
                if lam.entry(i, j) != quoted.entry(i, j) {
                    ok = false;
                    d.push(format!(
                        "{{{},{}}}: computed {} vs quoted {}",
                        EXPONENTIAL.vars[i],
                        EXPONENTIAL.vars[j],
                        lam.entry(i, j).render(),
                        quoted.entry(i, j).render()
                    ));
                }
            }
        }
        let images: [Trunc; 4] = exp_chart_functions(3).unwrap().map(|s| s.coeff_trunc(0));
        let b = symmetric_values(&lam, &images[0], &images[3], 2).unwrap();
        for (k, g) in reference::b_values_ad().iter().enumerate() {
            if &b[k].poly != g {
                ok = false;
                d.push(format!("B_G{}(a,d): computed {} vs quoted {}", k + 1, b[k].poly.render(), g.render()));
            }
        }
        let b_quoted = symmetric_values(&quoted, &images[0], &images[3], 2).unwrap();
        let matches = reference::b_values_ad().iter().zip(&b_quoted).filter(|(g, v)| &v.poly == *g).count();
        d.push(format!("the quoted tensor with the computed coordinates reproduces {matches} of 6 golden values"));
        let ct = extract_cochains(&star_table(2).unwrap(), EXPONENTIAL).unwrap();
        let ad = &ct.ct[&(0, 3)].poly;
        if !ad.is_zero() {
            ok = false;
        }
        d.push(format!("C_T(a,d) = {}", ad.render()));
        ok
    })
}

fn criterion_5() -> Line {
    timed(5, "Logarithm chart system: certified infeasible, quoted rows in row space, forward substitution", 30, |d, _| {
        let table = star_table(2).unwrap();
        let images: [Trunc; 4] = exp_chart_functions(3).unwrap().map(|s| s.coeff_trunc(0));
        let lam = exp_chart_tensor(3).unwrap();
        let sys = assemble_exponential_system(&lam, &images, &table).unwrap();
        let mut ok = match solve_or_certificate(&sys) {
            Outcome::Infeasible(c) => {
                let v = verify_certificate(&sys, &c);
                d.push(format!("{} rows, certificate 0 = {} verified: {v}", sys.len(), fmt_rat(&c.combined_rhs)));
                v
            }
            Outcome::Solution(_) => {
                d.push(format!("{} rows, feasible", sys.len()));
                false
            }
        };
        let rows = reference::exponential_rows();
        let outside: Vec<usize> = rows
            .iter()
            .enumerate()
            .filter(|(_, r)| !in_row_space(&sys, &r.coeffs, &r.rhs))
            .map(|(i, _)| i + 1)
            .collect();
        if !outside.is_empty() {
            ok = false;
            d.push(format!("quoted rows outside the row space: {outside:?}"));
        }
        let fs = forward_substitute(&EXP_UNKNOWNS, &rows[..5], &rows[5]);
        let fs_ok = fs.determined && fs.lhs == Some(rat(7, 16)) && fs.rhs == rat(-9, 16);
        d.push(format!(
            "rows 1-5 into row 6: {} vs {}",
            fs.lhs.as_ref().map(fmt_rat).unwrap_or_else(|| "undetermined".into()),
            fmt_rat(&fs.rhs)
        ));
        ok && fs_ok
    })
}

fn criterion_6() -> Line {
    timed(6, "Matrix-coordinate system: contradictory K4 pair, certified infeasible", 60, |d, flags| {
        let table = star_table(2).unwrap();
        let weights = solve_weights().unwrap();
        let kstar = order2_product(&ordinary_tensor(), &weights.weights).unwrap();
        let sys = assemble_ordinary_system(&kstar, &table).unwrap();
        let certified = match solve_or_certificate(&sys) {
            Outcome::Infeasible(c) => verify_certificate(&sys, &c),
            Outcome::Solution(_) => false,
        };
        d.push(format!("{} rows, certified infeasible: {certified}", sys.len()));
        let k4 = ORD_UNKNOWNS.iter().position(|u| *u == "K4").unwrap();
        let pair = contradictory_pairs(&sys).into_iter().find(|(i, _, gap)| {
            let c = &sys.rows()[*i].coeffs;
            c.iter().enumerate().all(|(k, x)| (k == k4) != x.is_zero()) && gap.abs() == rat(1, 8)
        });
        let found = match pair {
            Some((i, j, _)) => {
                let vi = &sys.rows()[i].rhs / &sys.rows()[i].coeffs[k4];
                let vj = &sys.rows()[j].rhs / &sys.rows()[j].coeffs[k4];
                d.push(format!("[{}] vs [{}]", sys.render_row(&sys.rows()[i]), sys.render_row(&sys.rows()[j])));
                let quoted = reference::ordinary_rows();
                let mut got = [vi, vj];
                got.sort();
                let mut want = [quoted[2].rhs.clone(), quoted[3].rhs.clone()];
                want.sort();
                if got != want {
                    flags.push(format!(
                        "K4 = {} vs {} computed; printed {} vs {} (same gap 1/8, offset differs)",
                        fmt_rat(&got[1]),
                        fmt_rat(&got[0]),
                        fmt_rat(&want[1]),
                        fmt_rat(&want[0])
                    ));
                }
                true
            }
            None => {
                d.push("no K4-only pair with gap 1/8".into());
                false
            }
        };
        found && certified
    })
}

fn random_quadratic(rng: &mut ChaCha8Rng) -> Trunc {
    let v = Poly::vars(ORDINARY);
    let mut p = Poly::constant(ORDINARY, int(rng.gen_range(-4..=4)));
    for i in 0..4 {
        p = p + v[i].scale(&int(rng.gen_range(-4..=4)));
        for j in i..4 {
            p = p + (&v[i] * &v[j]).scale(&int(rng.gen_range(-4..=4)));
        }
    }
    Trunc::exact(p)
}

fn criterion_7() -> Line {
    timed(7, "Graph weights: associativity on random triples, Monte Carlo agreement, wedge 1/2", 600, |d, _| {
        let solved = solve_weights().unwrap();
        let star = order2_product(&ordinary_tensor(), &solved.weights).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut ok = true;
        let mut bad = 0;
        for _ in 0..100 {
            let (f, g, h) = (random_quadratic(&mut rng), random_quadratic(&mut rng), random_quadratic(&mut rng));
            if !associativity_defect(&star, 2, &f, &g, &h).unwrap().poly.is_zero() {
                bad += 1;
            }
        }
        ok &= bad == 0;
        d.push(format!("order-2 associator nonzero on {bad} of 100 random quadratic triples"));
        let samples = 10_000_000;
        let wedge = KGraph::parse("n=1 m=2; p1->(q1,q2)").unwrap();
        let mut targets = vec![(wedge, rat(1, 2))];
        targets.extend(solved.classes.iter().map(|c| (c.representative.clone(), solved.weights[&c.representative].clone())));
        for (k, (g, w)) in targets.iter().enumerate() {
            let est = weight_estimate(g, samples, cli::DEFAULT_SEED).unwrap();
            let z = (est.estimate - to_f64(w)) / est.std_error;
            let good = z.abs() <= 3.0 && est.std_error < 1e-3 && (k > 0 || est.snapped.as_ref() == Some(w));
            ok &= good;
            d.push(format!(
                "{}: exact {} mc {:.6} +- {:.1e} z {:+.2} snapped {}",
                g.render(),
                fmt_rat(w),
                est.estimate,
                est.std_error,
                z,
                est.snapped.as_ref().map(fmt_rat).unwrap_or_else(|| "none".into())
            ));
        }
        ok
    })
}

fn criterion_8() -> Line {
    timed(8, "Graph combinatorics: ten generalized classes, six symmetric schemata", 1, |d, _| {
        let classes = enumerate_graphs(2, 2, true).unwrap();
        let counts = class_counts(2, 2, true).unwrap();
        d.push(format!(
            "{} classes; up to mirror {}, edge order kept {}",
            classes.len(),
            counts.classes_up_to_mirror,
            counts.ordered_edge_classes
        ));
        let basis = symmetric_basis();
        let placed = basis.iter().flat_map(|s| s.graphs.iter()).all(|g| classify(&classes, g).is_some());
        d.push(format!("{} schemata, all graphs among the enumerated classes: {placed}", basis.len()));
        classes.len() == 10 && basis.len() == 6 && placed
    })
}

fn pipeline(dir: &std::path::Path) -> Vec<u8> {
    let _ = std::fs::remove_dir_all(dir);
    let commands = vec![
        Command::VerifyPoisson,
        Command::Enumerate {
            n: 2,
            m: 2,
            generalized: true,
        },
        Command::Takhtajan { order: 2 },
        Command::Weights {
            seed: Some(11),
            samples: 100_000,
        },
        Command::Compare {
            chart: ChartArg::Exponential,
        },
        Command::Compare { chart: ChartArg::Ordinary },
        Command::Report { format: Format::Json },
    ];
    for command in commands {
        let cli = Cli {
            out: dir.to_path_buf(),
            command,
        };
        cli::execute(&cli, None).unwrap();
    }
    std::fs::read(dir.join("report.json")).unwrap()
}

fn criterion_9() -> Line {
    timed(9, "Determinism: two pipeline runs give byte-identical reports", 600, |d, _| {
        let base = std::env::temp_dir().join(format!("kstar-acceptance-{}", std::process::id()));
        let a = pipeline(&base.join("first"));
        let b = pipeline(&base.join("second"));
        let _ = std::fs::remove_dir_all(&base);
        d.push(format!("report sizes {} and {} bytes", a.len(), b.len()));
        !a.is_empty() && a == b
    })
}

#[test]
fn acceptance() {
    let lines = [
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
    ];
    out!();
    for l in &lines {
        l.print();
    }
    let passed = lines.iter().filter(|l| l.ok && l.elapsed <= l.budget).count();
    out!("acceptance: {passed} of {} criteria pass", lines.len());
}
