//! Command-line driver: runs the verification pipelines, writes JSON
//! artifacts under an output directory and aggregates them into reports.
//!
//! Exit codes: 0 when every check passes (or is only flagged), 1 when a check
//! fails, 2 on usage errors.

use crate::exactmath::{fmt_rat, int, rat, Poly, Rational, Trunc, EXPONENTIAL, ORDINARY};
use crate::graphs::{class_counts, classify, enumerate_graphs, symmetric_basis, KGraph};
use crate::kontsevich::{associativity_defect, order2_product, solve_weights, to_f64, weight_estimate};
use crate::liealg::{cybe_defect, r_bracket, r_tilde};
use crate::poisson::{exp_chart_functions, exp_chart_tensor, exp_chart_tensor_by_jacobian, jacobi_holds, ordinary_tensor};
use crate::reference;
use crate::solver::{
    assemble_exponential_system, assemble_ordinary_system, coeffs_in_row_space, contradictory_pairs, forward_substitute,
    in_row_space, solve_or_certificate, symmetric_values, verify_certificate, LinSystem, Outcome, EXP_UNKNOWNS,
    ORD_UNKNOWNS,
};
use crate::takhtajan::{check_axioms, extract_cochains, star_table};
use clap::{Parser, Subcommand, ValueEnum};
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Environment variable overriding the default Monte Carlo seed.
pub const SEED_ENV: &str = "KSTAR_SEED";
pub const DEFAULT_SEED: u64 = 20240601;
pub const DEFAULT_SAMPLES: u64 = 1_000_000;

/// Artifacts `report` requires.
pub const ARTIFACTS: [&str; 4] = ["system.json", "certificate.json", "startable.json", "weights.json"];

#[derive(Parser, Debug)]
#[command(name = "kstar", about = "Exact star-product comparison workbench", version)]
pub struct Cli {
    /// Directory receiving the JSON artifacts.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Modified Yang-Baxter defect, quadratic brackets and Jacobi in both charts.
    VerifyPoisson,
    /// List graph classes with `n` aerial and `m` terrestrial vertices.
    Enumerate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        /// Allow edges back to the emitting vertex.
        #[arg(long)]
        generalized: bool,
    },
    /// Expand the quantum-group product and check its axioms.
    Takhtajan {
        #[arg(long, default_value_t = 2)]
        order: usize,
    },
    /// Exact weights plus Monte Carlo cross-check.
    Weights {
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: u64,
    },
    /// Assemble and decide the coefficient system in one chart.
    Compare {
        #[arg(long, value_enum)]
        chart: ChartArg,
    },
    /// Aggregate the artifacts of earlier runs.
    Report {
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChartArg {
    Ordinary,
    Exponential,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Md,
}

#[derive(thiserror::Error, Debug)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("io error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed artifact {0}")]
    Artifact(String),
    #[error("{0}")]
    Compute(String),
}

fn compute<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Compute(e.to_string())
}

#[derive(Serialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Flagged,
}

impl Status {
    fn of(ok: bool) -> Status {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    fn soft(ok: bool) -> Status {
        if ok {
            Status::Pass
        } else {
            Status::Flagged
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Flagged => "FLAG",
        }
    }
}

#[derive(Serialize, Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

/// Outcome of one subcommand.
#[derive(Serialize, Clone, Debug, Default)]
pub struct RunReport {
    pub command: String,
    pub inputs: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    pub artifacts: Vec<String>,
    /// Human-readable lines printed before the checks.
    #[serde(skip)]
    pub listing: Vec<String>,
    /// Rendered report text for `report`.
    #[serde(skip)]
    pub rendered: Option<String>,
}

impl RunReport {
    fn new(command: &str) -> Self {
        RunReport {
            command: command.into(),
            ..Default::default()
        }
    }

    fn input(&mut self, key: &str, v: Value) {
        self.inputs.insert(key.into(), v);
    }

    fn check(&mut self, name: &str, status: Status, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            status,
            detail: detail.into(),
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

fn to_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    s
}

fn write_file(dir: &Path, name: &str, text: &str) -> Result<String, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io {
        path: dir.display().to_string(),
        source: e,
    })?;
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    Ok(name.to_string())
}

fn read_json(dir: &Path, name: &str) -> Result<Option<Value>, CliError> {
    let path = dir.join(name);
    match std::fs::read_to_string(&path) {
        Ok(s) => serde_json::from_str(&s).map(Some).map_err(|_| CliError::Artifact(name.into())),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(CliError::Io {
            path: path.display().to_string(),
            source: e,
        }),
    }
}

/// Insert `value` under `key` in the JSON object stored in `name`.
fn merge_keyed(dir: &Path, name: &str, key: &str, value: Value) -> Result<String, CliError> {
    let mut obj = match read_json(dir, name)? {
        Some(Value::Object(m)) => m,
        Some(_) => return Err(CliError::Artifact(name.into())),
        None => serde_json::Map::new(),
    };
    obj.insert(key.into(), value);
    write_file(dir, name, &to_text(&Value::Object(obj)))
}

fn ordinary(s: &str) -> Poly {
    Poly::parse(ORDINARY, s).expect("built-in polynomial")
}

/// Structure checks of the quadratic Poisson bracket.
pub fn verify_poisson() -> Result<RunReport, CliError> {
    let mut rep = RunReport::new("verify-poisson");
    rep.input("exponential_tensor_degree", json!(3));

    let d = cybe_defect(&r_tilde());
    rep.check(
        "modified-cybe",
        Status::of(!d.i123.is_zero() && d.alternating && d.invariant),
        format!(
            "I123 = {} (nonzero: {}, alternating: {}, invariant: {})",
            d.i123.render(),
            !d.i123.is_zero(),
            d.alternating,
            d.invariant
        ),
    );

    let expected = [
        ("a", "b", "a*b"),
        ("a", "c", "a*c"),
        ("b", "c", "0"),
        ("b", "d", "b*d"),
        ("c", "d", "c*d"),
        ("a", "d", "2*b*c"),
    ];
    let lam = ordinary_tensor();
    let flipped = r_tilde().flip();
    let mut bad = Vec::new();
    let mut literal_negated = true;
    let mut literal_equal = true;
    for (f, g, e) in expected {
        let want = ordinary(e);
        let from_r = r_bracket(&flipped, &ordinary(f), &ordinary(g)).map_err(compute)?;
        let literal = r_bracket(&r_tilde(), &ordinary(f), &ordinary(g)).map_err(compute)?;
        let tensor = lam.entry_named(f, g).map_err(compute)?;
        if from_r != want || tensor != &want {
            bad.push(format!("{{{f},{g}}} = {} (tensor {}) vs {}", from_r.render(), tensor.render(), e));
        }
        literal_negated &= literal == -want.clone();
        literal_equal &= literal == want;
    }
    rep.check(
        "quadratic-relations",
        Status::of(bad.is_empty()),
        if bad.is_empty() {
            "{a,b}=ab {a,c}=ac {b,c}=0 {b,d}=bd {c,d}=cd {a,d}=2bc".to_string()
        } else {
            bad.join("; ")
        },
    );
    rep.check(
        "bracket-orientation",
        if literal_equal {
            Status::Pass
        } else if literal_negated {
            Status::Flagged
        } else {
            Status::Fail
        },
        if literal_equal {
            "r-bracket with r as given reproduces the relations".to_string()
        } else {
            "r-bracket with r as given yields the negated relations; the flipped r = -r reproduces them".to_string()
        },
    );

    rep.check("jacobi-ordinary", Status::of(jacobi_holds(&lam)), "cyclic sums vanish identically");
    let exp = exp_chart_tensor(3).map_err(compute)?;
    rep.check(
        "jacobi-exponential",
        Status::of(jacobi_holds(&exp)),
        format!("cyclic sums vanish through trusted degree ({})", exp.trust()),
    );
    let by_jac = exp_chart_tensor_by_jacobian(3);
    let mut diff = Vec::new();
    for i in 0..4 {
        for j in i + 1..4 {
            if exp.entry(i, j) != by_jac.entry(i, j) {
                diff.push(format!("({},{})", EXPONENTIAL.vars[i], EXPONENTIAL.vars[j]));
            }
        }
    }
    rep.check(
        "exponential-two-routes",
        Status::of(diff.is_empty()),
        if diff.is_empty() {
            "bracket transport and Jacobian pushforward agree through degree 3".to_string()
        } else {
            format!("differ at {}", diff.join(" "))
        },
    );
    Ok(rep)
}

pub fn enumerate(n: usize, m: usize, generalized: bool) -> Result<RunReport, CliError> {
    let mut rep = RunReport::new("enumerate");
    rep.input("n", json!(n));
    rep.input("m", json!(m));
    rep.input("generalized", json!(generalized));
    let classes = enumerate_graphs(n, m, generalized).map_err(|e| CliError::Usage(e.to_string()))?;
    for (i, c) in classes.iter().enumerate() {
        rep.listing.push(format!(
            "{:>3}  {}  members {}  mirror {}{}",
            i + 1,
            c.representative.render(),
            c.members.len(),
            c.mirror + 1,
            if c.vanishes() { "  (operator vanishes)" } else { "" }
        ));
    }
    rep.listing.push(format!("count: {}", classes.len()));
    let counts = class_counts(n, m, generalized).map_err(compute)?;
    let alt = format!(
        "up to mirror {}, edge order kept {}, edge order kept and up to mirror {}",
        counts.classes_up_to_mirror, counts.ordered_edge_classes, counts.ordered_edge_classes_up_to_mirror
    );
    if (n, m) == (2, 2) {
        let want = if generalized { 10 } else { 4 };
        rep.check(
            "class-count",
            Status::of(classes.len() == want),
            format!("{} classes (expected {want}); alternatives: {alt}", classes.len()),
        );
        let basis = symmetric_basis();
        let all = enumerate_graphs(2, 2, true).map_err(compute)?;
        let unplaced: Vec<String> = basis
            .iter()
            .flat_map(|s| s.graphs.iter())
            .filter(|g| classify(&all, g).is_none())
            .map(KGraph::render)
            .collect();
        rep.check(
            "symmetric-basis",
            Status::of(basis.len() == 6 && unplaced.is_empty()),
            if unplaced.is_empty() {
                format!(
                    "{} schemata: {}",
                    basis.len(),
                    basis.iter().map(|s| format!("{}[{}]", s.label, s.graphs.len())).collect::<Vec<_>>().join(" ")
                )
            } else {
                format!("graphs outside the enumeration: {}", unplaced.join(", "))
            },
        );
    } else {
        rep.check("class-count", Status::Pass, format!("{} classes; alternatives: {alt}", classes.len()));
    }
    Ok(rep)
}

pub fn takhtajan(order: usize, out: &Path) -> Result<RunReport, CliError> {
    if order == 0 {
        return Err(CliError::Usage("--order must be at least 1".into()));
    }
    let mut rep = RunReport::new("takhtajan");
    rep.input("t_order", json!(order));
    let table = star_table(order).map_err(compute)?;
    for c in check_axioms(&table).checks {
        rep.check(&c.name, Status::of(c.ok), c.detail);
    }
    let rels = reference::star_relations(order).map_err(compute)?;
    let bad: Vec<String> = rels
        .iter()
        .filter(|(u, v, s)| table.product(*u, *v) != s)
        .map(|(u, v, s)| {
            format!(
                "{}*{} = {:?} vs {:?}",
                ORDINARY.vars[*u],
                ORDINARY.vars[*v],
                table.product(*u, *v).render(),
                s.render()
            )
        })
        .collect();
    rep.check(
        "closed-form-relations",
        Status::of(bad.is_empty()),
        if bad.is_empty() {
            format!("{} ordered products match their closed forms through t^{order}", rels.len())
        } else {
            bad.join("; ")
        },
    );
    let mut cochains = serde_json::Map::new();
    if order >= 2 {
        for chart in [ORDINARY, EXPONENTIAL] {
            let c = extract_cochains(&table, chart).map_err(compute)?;
            let dump = |m: &BTreeMap<(usize, usize), Trunc>| -> Value {
                let mut o = serde_json::Map::new();
                for ((u, v), t) in m {
                    if u <= v || chart == ORDINARY {
                        o.insert(format!("{},{}", ORDINARY.vars[*u], ORDINARY.vars[*v]), json!(t.poly.render()));
                    }
                }
                Value::Object(o)
            };
            cochains.insert(chart.name.into(), json!({ "C1": dump(&c.c1), "C_T": dump(&c.ct) }));
            if chart == EXPONENTIAL {
                let ad = &c.ct[&(0, 3)];
                rep.check("C_T(a,d)", Status::of(ad.poly.is_zero()), format!("{} in logarithm coordinates", ad.poly.render()));
            }
        }
    }
    for ((u, v), s) in table.products() {
        rep.listing.push(format!("{}*{} = {}", ORDINARY.vars[*u], ORDINARY.vars[*v], s.render().join(" | ")));
    }
    let artifact = json!({
        "t_order": order,
        "products": table.to_json(),
        "cochains": Value::Object(cochains),
    });
    rep.artifacts.push(write_file(out, "startable.json", &to_text(&artifact))?);
    Ok(rep)
}

fn random_quadratic(rng: &mut ChaCha8Rng) -> Trunc {
    let v = Poly::vars(ORDINARY);
    let mut p = Poly::constant(ORDINARY, int(rng.gen_range(-3..=3)));
    for i in 0..4 {
        p = p + v[i].scale(&int(rng.gen_range(-3..=3)));
        for j in i..4 {
            p = p + (&v[i] * &v[j]).scale(&int(rng.gen_range(-3..=3)));
        }
    }
    Trunc::exact(p)
}

pub fn weights(seed: u64, samples: u64, out: &Path) -> Result<RunReport, CliError> {
    if samples < 2 {
        return Err(CliError::Usage("--samples must be at least 2".into()));
    }
    let mut rep = RunReport::new("weights");
    rep.input("seed", json!(seed));
    rep.input("samples", json!(samples));
    let solved = solve_weights().map_err(compute)?;
    for (k, q) in &solved.pinned {
        let w = solved.weight(*k);
        rep.check(
            "quadrature",
            Status::of(q.snapped.as_ref() == Some(w)),
            format!(
                "{}: {:.10} +- {:.1e} -> {}",
                solved.classes[*k].representative.render(),
                q.value,
                q.error,
                fmt_rat(w)
            ),
        );
    }

    let star = order2_product(&ordinary_tensor(), &solved.weights).map_err(compute)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nonzero = Vec::new();
    const TRIPLES: usize = 100;
    for _ in 0..TRIPLES {
        let (f, g, h) = (random_quadratic(&mut rng), random_quadratic(&mut rng), random_quadratic(&mut rng));
        let d = associativity_defect(&star, 2, &f, &g, &h).map_err(compute)?;
        if !d.poly.is_zero() && nonzero.len() < 3 {
            nonzero.push(format!("f={} g={} h={}: {}", f.poly.render(), g.poly.render(), h.poly.render(), d.poly.render()));
        }
    }
    rep.check(
        "associativity-t2",
        Status::of(nonzero.is_empty()),
        if nonzero.is_empty() {
            format!("order-2 associator vanishes on {TRIPLES} random quadratic triples")
        } else {
            nonzero.join("; ")
        },
    );

    let wedge = KGraph::parse("n=1 m=2; p1->(q1,q2)").map_err(compute)?;
    let mut targets: Vec<(KGraph, Rational)> = vec![(wedge, rat(1, 2))];
    targets.extend(solved.classes.iter().map(|c| (c.representative.clone(), solved.weights[&c.representative].clone())));
    let mut estimates = Vec::new();
    for (g, w) in &targets {
        let est = weight_estimate(g, samples, seed).map_err(compute)?;
        let z = (est.estimate - to_f64(w)) / est.std_error;
        rep.check(
            "monte-carlo",
            Status::of(z.abs() <= 3.0),
            format!(
                "{}: exact {} estimate {:.6} +- {:.1e} (z {:+.2})",
                g.render(),
                fmt_rat(w),
                est.estimate,
                est.std_error,
                z
            ),
        );
        let snapped = est.snapped.as_ref().map(fmt_rat).unwrap_or_else(|| "none".into());
        rep.check(
            "snap",
            Status::soft(est.snapped.as_ref() == Some(w)),
            format!("{}: snapped {snapped} (denominator <= 48 within 3 std errors)", g.render()),
        );
        if samples >= 10_000_000 {
            rep.check(
                "monte-carlo-precision",
                Status::of(est.std_error < 1e-3),
                format!("{}: std error {:.1e} at {} samples", g.render(), est.std_error, samples),
            );
        }
        let mut j = est.to_json();
        j["exact"] = json!(fmt_rat(w));
        estimates.push(j);
    }
    let artifact = json!({
        "seed": seed,
        "samples": samples,
        "solved": solved.to_json(),
        "estimates": estimates,
    });
    rep.artifacts.push(write_file(out, "weights.json", &to_text(&artifact))?);
    Ok(rep)
}

fn outcome_json(sys: &LinSystem) -> (Status, String, Value) {
    match solve_or_certificate(sys) {
        Outcome::Infeasible(c) => {
            let ok = verify_certificate(sys, &c);
            (
                Status::of(ok),
                format!(
                    "{} rows infeasible; certificate combines {} rows into 0 = {} (verified: {ok})",
                    sys.len(),
                    c.multipliers.iter().filter(|m| !m.is_zero()).count(),
                    fmt_rat(&c.combined_rhs)
                ),
                c.to_json(sys),
            )
        }
        Outcome::Solution(s) => (
            Status::Fail,
            format!(
                "{} rows feasible (nullity {}): {}",
                sys.len(),
                s.nullity,
                s.assignment.iter().zip(&sys.unknowns).map(|(x, u)| format!("{u}={}", fmt_rat(x))).collect::<Vec<_>>().join(" ")
            ),
            json!({ "feasible": true, "assignment": s.assignment.iter().map(fmt_rat).collect::<Vec<_>>(), "nullity": s.nullity }),
        ),
    }
}

fn membership(sys: &LinSystem, rows: &[reference::QuotedRow]) -> (Vec<usize>, Vec<usize>) {
    let full: Vec<usize> = rows.iter().enumerate().filter(|(_, r)| in_row_space(sys, &r.coeffs, &r.rhs)).map(|(i, _)| i + 1).collect();
    let lhs: Vec<usize> = rows.iter().enumerate().filter(|(_, r)| coeffs_in_row_space(sys, &r.coeffs)).map(|(i, _)| i + 1).collect();
    (full, lhs)
}

fn list(v: &[usize]) -> String {
    if v.is_empty() {
        "none".into()
    } else {
        v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(",")
    }
}

pub fn compare(chart: ChartArg, out: &Path) -> Result<RunReport, CliError> {
    let table = star_table(2).map_err(compute)?;
    match chart {
        ChartArg::Exponential => compare_exponential(&table, out),
        ChartArg::Ordinary => compare_ordinary(&table, out),
    }
}

fn compare_exponential(table: &crate::takhtajan::StarTable, out: &Path) -> Result<RunReport, CliError> {
    let mut rep = RunReport::new("compare");
    rep.input("chart", json!("exponential"));
    rep.input("t_order", json!(2));
    rep.input("coordinate_degree", json!(2));
    rep.input("tensor_degree", json!(3));

    let images: [Trunc; 4] = exp_chart_functions(3).map_err(compute)?.map(|s| s.coeff_trunc(0));
    let lam = exp_chart_tensor(3).map_err(compute)?;
    let sys = assemble_exponential_system(&lam, &images, table).map_err(compute)?;
    let (status, detail, cert) = outcome_json(&sys);
    rep.check("infeasibility-certificate", status, detail);

    let quoted = reference::exp_tensor();
    let mut diffs = Vec::new();
    for i in 0..4 {
        for j in i + 1..4 {
            if lam.entry(i, j) != quoted.entry(i, j) {
                diffs.push(format!(
                    "{{{},{}}}: computed {} vs quoted {}",
                    EXPONENTIAL.vars[i],
                    EXPONENTIAL.vars[j],
                    lam.entry(i, j).render(),
                    quoted.entry(i, j).render()
                ));
            }
        }
    }
    rep.check(
        "tensor-vs-quoted",
        Status::soft(diffs.is_empty()),
        if diffs.is_empty() { "all entries agree through degree 3".to_string() } else { diffs.join("; ") },
    );

    let quoted_images = reference::exp_images();
    let mut img_diffs = Vec::new();
    for (k, q) in quoted_images.iter().enumerate() {
        if &images[k].poly.truncate(3) != q {
            img_diffs.push(format!("{}: computed {} vs quoted {}", ORDINARY.vars[k], images[k].poly.truncate(3).render(), q.render()));
        }
    }
    rep.check(
        "coordinates-vs-quoted",
        Status::soft(img_diffs.is_empty()),
        if img_diffs.is_empty() { "matrix entries agree through degree 3".to_string() } else { img_diffs.join("; ") },
    );

    let golden = reference::b_values_ad();
    let computed = symmetric_values(&lam, &images[0], &images[3], 2).map_err(compute)?;
    let from_quoted = symmetric_values(&quoted, &images[0], &images[3], 2).map_err(compute)?;
    for (k, g) in golden.iter().enumerate() {
        let ok = &computed[k].poly == g;
        let detail = if ok {
            g.render()
        } else {
            format!(
                "computed {} vs quoted {} (quoted tensor with computed coordinates gives {})",
                computed[k].poly.render(),
                g.render(),
                from_quoted[k].poly.render()
            )
        };
        rep.check(&format!("golden-B_G{}(a,d)", k + 1), Status::soft(ok), detail);
    }
    let ct = extract_cochains(table, EXPONENTIAL).map_err(compute)?;
    rep.check("C_T(a,d)", Status::of(ct.ct[&(0, 3)].poly.is_zero()), ct.ct[&(0, 3)].poly.render());

    let rows = reference::exponential_rows();
    let (full, lhs) = membership(&sys, &rows);
    rep.check(
        "quoted-rows-in-row-space",
        Status::soft(full.len() == rows.len()),
        format!("rows with rhs in span: {}; lhs in span: {}", list(&full), list(&lhs)),
    );
    let quoted_sys = assemble_exponential_system(&quoted, &images, table).map_err(compute)?;
    let (qfull, _) = membership(&quoted_sys, &rows);
    let (qstatus, qdetail, _) = outcome_json(&quoted_sys);
    rep.check(
        "quoted-tensor-system",
        if qstatus == Status::Pass { Status::Flagged } else { Status::Fail },
        format!("with quoted tensor: {qdetail}; quoted rows in span: {}", list(&qfull)),
    );
    let fs = forward_substitute(&EXP_UNKNOWNS, &rows[..5], &rows[5]);
    rep.check(
        "forward-substitution",
        Status::of(fs.determined && fs.lhs == Some(rat(7, 16)) && fs.rhs == rat(-9, 16)),
        format!(
            "rows 1-5 into row 6: {} vs {}",
            fs.lhs.as_ref().map(fmt_rat).unwrap_or_else(|| "undetermined".into()),
            fmt_rat(&fs.rhs)
        ),
    );

    rep.artifacts.push(merge_keyed(out, "system.json", "exponential", sys.to_json())?);
    rep.artifacts.push(merge_keyed(out, "certificate.json", "exponential", cert)?);
    Ok(rep)
}

fn compare_ordinary(table: &crate::takhtajan::StarTable, out: &Path) -> Result<RunReport, CliError> {
    let mut rep = RunReport::new("compare");
    rep.input("chart", json!("ordinary"));
    rep.input("t_order", json!(2));

    let solved = solve_weights().map_err(compute)?;
    let kstar = order2_product(&ordinary_tensor(), &solved.weights).map_err(compute)?;
    let sys = assemble_ordinary_system(&kstar, table).map_err(compute)?;
    let (status, detail, cert) = outcome_json(&sys);
    rep.check("infeasibility-certificate", status, detail);

    let k4 = ORD_UNKNOWNS.iter().position(|u| *u == "K4").expect("K4 unknown");
    let only_k4 = |c: &[Rational]| c.iter().enumerate().all(|(i, x)| (i == k4) != x.is_zero());
    let pairs: Vec<(usize, usize, Rational)> = contradictory_pairs(&sys)
        .into_iter()
        .filter(|(i, _, _)| only_k4(&sys.rows()[*i].coeffs))
        .collect();
    let quoted = reference::ordinary_rows();
    let quoted_gap = &quoted[2].rhs - &quoted[3].rhs;
    match pairs.first() {
        Some((i, j, gap)) => {
            let norm = |r: usize| {
                let row = &sys.rows()[r];
                &row.rhs / &row.coeffs[k4]
            };
            let (vi, vj) = (norm(*i), norm(*j));
            rep.check(
                "contradictory-pair",
                Status::of(gap.abs() == quoted_gap.abs()),
                format!(
                    "[{}] vs [{}]: K4 = {} vs K4 = {} (gap {})",
                    sys.render_row(&sys.rows()[*i]),
                    sys.render_row(&sys.rows()[*j]),
                    fmt_rat(&vi),
                    fmt_rat(&vj),
                    fmt_rat(&(&vi - &vj).abs())
                ),
            );
            let printed = [quoted[2].rhs.clone(), quoted[3].rhs.clone()];
            let mut got = [vi.clone(), vj.clone()];
            got.sort();
            let mut want = printed.clone();
            want.sort();
            rep.check(
                "printed-offset",
                Status::soft(got == want),
                format!(
                    "computed K4 = {} and {}; printed K4 = {} and {}",
                    fmt_rat(&got[1]),
                    fmt_rat(&got[0]),
                    fmt_rat(&want[1]),
                    fmt_rat(&want[0])
                ),
            );
        }
        None => rep.check("contradictory-pair", Status::Fail, "no pair of rows constraining K4 alone"),
    }
    let (full, lhs) = membership(&sys, &quoted);
    rep.check(
        "quoted-rows-in-row-space",
        Status::soft(full.len() == quoted.len()),
        format!("rows with rhs in span: {}; lhs in span: {}", list(&full), list(&lhs)),
    );
    for note in &sys.notes {
        rep.listing.push(format!("note: {note}"));
    }
    rep.artifacts.push(merge_keyed(out, "system.json", "ordinary", sys.to_json())?);
    rep.artifacts.push(merge_keyed(out, "certificate.json", "ordinary", cert)?);
    Ok(rep)
}

/// Aggregate the four artifacts and all `run-*.json` files without recomputing.
pub fn report(format: Format, out: &Path) -> Result<RunReport, CliError> {
    let mut rep = RunReport::new("report");
    rep.input("format", json!(match format {
        Format::Json => "json",
        Format::Md => "md",
    }));
    let mut artifacts = serde_json::Map::new();
    let mut missing = Vec::new();
    for name in ARTIFACTS {
        match read_json(out, name)? {
            Some(v) => {
                artifacts.insert(name.into(), v);
            }
            None => missing.push(name),
        }
    }
    rep.check(
        "artifacts-present",
        Status::of(missing.is_empty()),
        if missing.is_empty() { ARTIFACTS.join(", ") } else { format!("missing: {}", missing.join(", ")) },
    );
    if !missing.is_empty() {
        return Ok(rep);
    }
    let mut run_names: Vec<String> = std::fs::read_dir(out)
        .map_err(|e| CliError::Io {
            path: out.display().to_string(),
            source: e,
        })?
        .filter_map(|e| e.ok().map(|e| e.file_name().to_string_lossy().into_owned()))
        .filter(|n| n.starts_with("run-") && n.ends_with(".json") && n != "run-report.json")
        .collect();
    run_names.sort();
    let mut runs = Vec::new();
    for n in &run_names {
        let v = read_json(out, n)?.ok_or_else(|| CliError::Artifact(n.clone()))?;
        let failed: Vec<String> = v["checks"]
            .as_array()
            .ok_or_else(|| CliError::Artifact(n.clone()))?
            .iter()
            .filter(|c| c["status"] == "fail")
            .map(|c| c["name"].as_str().unwrap_or("?").to_string())
            .collect();
        rep.check(
            n.trim_start_matches("run-").trim_end_matches(".json"),
            Status::of(failed.is_empty()),
            if failed.is_empty() { "no failed checks".to_string() } else { format!("failed: {}", failed.join(", ")) },
        );
        runs.push(v);
    }
    let doc = json!({ "artifacts": Value::Object(artifacts), "runs": runs });
    let (name, text) = match format {
        Format::Json => ("report.json", to_text(&doc)),
        Format::Md => ("report.md", render_markdown(&doc)),
    };
    rep.artifacts.push(write_file(out, name, &text)?);
    rep.rendered = Some(text);
    Ok(rep)
}

fn render_markdown(doc: &Value) -> String {
    let mut s = String::from("# kstar report\n");
    for run in doc["runs"].as_array().into_iter().flatten() {
        s.push_str(&format!("\n## {}\n\n", run["command"].as_str().unwrap_or("?")));
        if let Some(inputs) = run["inputs"].as_object() {
            for (k, v) in inputs {
                s.push_str(&format!("- {k}: `{v}`\n"));
            }
            s.push('\n');
        }
        s.push_str("| check | status | detail |\n|---|---|---|\n");
        for c in run["checks"].as_array().into_iter().flatten() {
            s.push_str(&format!(
                "| {} | {} | `{}` |\n",
                c["name"].as_str().unwrap_or(""),
                c["status"].as_str().unwrap_or(""),
                c["detail"].as_str().unwrap_or("").replace('|', "\\|")
            ));
        }
    }
    let arts = &doc["artifacts"];
    if let Some(cert) = arts["certificate.json"].as_object() {
        s.push_str("\n## certificates\n");
        for (chart, c) in cert {
            s.push_str(&format!("\n### {chart}\n\ncombined right-hand side: `{}`\n\n", c["combined_rhs"].as_str().unwrap_or("-")));
            for r in c["support"].as_array().into_iter().flatten() {
                s.push_str(&format!(
                    "- `{}` x `{}`\n",
                    r["multiplier"].as_str().unwrap_or(""),
                    r["text"].as_str().unwrap_or("")
                ));
            }
        }
    }
    if let Some(classes) = arts["weights.json"]["solved"]["classes"].as_array() {
        s.push_str("\n## weights\n\n");
        for c in classes {
            s.push_str(&format!("- `{}`: `{}`\n", c["graph"].as_str().unwrap_or(""), c["weight"].as_str().unwrap_or("")));
        }
    }
    s
}

fn seed_from_env(explicit: Option<u64>, env: Option<&str>) -> Result<u64, CliError> {
    match (explicit, env) {
        (Some(s), _) => Ok(s),
        (None, Some(v)) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{SEED_ENV}={v} is not an unsigned integer"))),
        (None, None) => Ok(DEFAULT_SEED),
    }
}

/// Run one parsed command and write its `run-<command>.json`.
pub fn execute(cli: &Cli, env_seed: Option<&str>) -> Result<RunReport, CliError> {
    let out = cli.out.as_path();
    let mut rep = match &cli.command {
        Command::VerifyPoisson => verify_poisson()?,
        Command::Enumerate { n, m, generalized } => enumerate(*n, *m, *generalized)?,
        Command::Takhtajan { order } => takhtajan(*order, out)?,
        Command::Weights { seed, samples } => weights(seed_from_env(*seed, env_seed)?, *samples, out)?,
        Command::Compare { chart } => compare(*chart, out)?,
        Command::Report { format } => return report(*format, out),
    };
    let name = match &cli.command {
        Command::Compare { chart } => format!(
            "run-compare-{}.json",
            match chart {
                ChartArg::Ordinary => "ordinary",
                ChartArg::Exponential => "exponential",
            }
        ),
        _ => format!("run-{}.json", rep.command),
    };
    rep.artifacts.push(name.clone());
    write_file(out, &name, &to_text(&rep.to_json()))?;
    Ok(rep)
}

/// Parse arguments, run, print and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let env_seed = std::env::var(SEED_ENV).ok();
    match execute(&cli, env_seed.as_deref()) {
        Ok(rep) => {
            for line in &rep.listing {
                println!("{line}");
            }
            match &rep.rendered {
                Some(text) => print!("{text}"),
                None => {
                    for c in &rep.checks {
                        println!("{} {}: {}", c.status.label(), c.name, c.detail);
                    }
                }
            }
            if rep.rendered.is_some() {
                for c in rep.checks.iter().filter(|c| c.status == Status::Fail) {
                    eprintln!("FAIL {}: {}", c.name, c.detail);
                }
            }
            rep.exit_code()
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_precedence() {
        assert_eq!(seed_from_env(Some(5), Some("7")).unwrap(), 5);
        assert_eq!(seed_from_env(None, Some("7")).unwrap(), 7);
        assert_eq!(seed_from_env(None, None).unwrap(), DEFAULT_SEED);
        assert!(matches!(seed_from_env(None, Some("x")), Err(CliError::Usage(_))));
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(["kstar", "frobnicate"]), 2);
        assert_eq!(run(["kstar", "compare", "--chart", "polar"]), 2);
        assert_eq!(run(["kstar", "enumerate", "--n", "2"]), 2);
    }

    #[test]
    fn enumerate_lists_ten_generalized_classes() {
        let rep = enumerate(2, 2, true).unwrap();
        assert_eq!(rep.listing.last().unwrap(), "count: 10");
        assert!(rep.passed());
        let std = enumerate(2, 2, false).unwrap();
        assert_eq!(std.listing.last().unwrap(), "count: 4");
    }

    #[test]
    fn report_refuses_missing_artifacts() {
        let dir = std::env::temp_dir().join(format!("kstar-empty-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        let rep = report(Format::Json, &dir).unwrap();
        assert!(!rep.passed());
        assert!(rep.checks[0].detail.contains("system.json"));
        assert!(!dir.join("report.json").exists());
    }

    #[test]
    fn keyed_merge_keeps_other_charts() {
        let dir = std::env::temp_dir().join(format!("kstar-merge-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        merge_keyed(&dir, "x.json", "b", json!(1)).unwrap();
        merge_keyed(&dir, "x.json", "a", json!(2)).unwrap();
        merge_keyed(&dir, "x.json", "b", json!(3)).unwrap();
        assert_eq!(read_json(&dir, "x.json").unwrap().unwrap(), json!({"a": 2, "b": 3}));
        let _ = std::fs::remove_dir_all(&dir);
    }
}
