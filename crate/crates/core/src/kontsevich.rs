//! Graph weights: angle-form integrals over configurations of aerial points in
//! the upper half-plane, their exact determination from associativity, and the
//! order-2 graph star product.
//!
//! Normalization: `w(G) = 1/(n! (2 pi)^{2n}) * int wedge_e dphi_e`, edges wedged
//! in the order `p1.first, p1.second, p2.first, ...`, aerial point `p_k` with
//! coordinates `(x_k, y_k)` and orientation `dx1 dy1 dx2 dy2 ...`. Terrestrial
//! points are fixed at `0` and `1`. Floating point stays inside this module;
//! only snapped rationals leave it.

use crate::bidiff::{first_order_cochain, operator_from_graph, BiStar, BidiffError, DiffOp, StarCochains};
use crate::exactmath::{fmt_rat, int, rat, Poly, Rational, Trunc, Trust, ORDINARY};
use crate::graphs::{classify, enumerate_graphs, GraphClass, GraphError, KGraph, Vertex};
use crate::poisson::PoissonTensor;
use crate::solver::{coeffs_in_row_space, solve_or_certificate, LinSystem, Outcome, Provenance, SolverError};
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum KontsevichError {
    #[error("coincident points ({0}, {1})")]
    Coincident(String, String),
    #[error("point {0} is not in the closed upper half-plane")]
    OffDomain(String),
    #[error("graph {0} has a loop; its angle form is undefined")]
    Loop(String),
    #[error("unsupported graph {0}: {1}")]
    Unsupported(String, String),
    #[error("no weight supplied for class {0}")]
    MissingWeight(String),
    #[error("weights not determined: {0}")]
    Undetermined(String),
    #[error("associativity system is inconsistent")]
    Inconsistent,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Bidiff(#[from] BidiffError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// A point of the closed upper half-plane; `y = 0` for terrestrial points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HPoint {
    pub x: f64,
    pub y: f64,
}

impl HPoint {
    /// Aerial point, `y > 0`.
    pub fn aerial(x: f64, y: f64) -> Result<Self, KontsevichError> {
        if y > 0.0 && x.is_finite() && y.is_finite() {
            Ok(HPoint { x, y })
        } else {
            Err(KontsevichError::OffDomain(format!("({x}, {y})")))
        }
    }

    pub fn boundary(x: f64) -> Self {
        HPoint { x, y: 0.0 }
    }

    fn z(self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }
}

/// `phi(p, q) = arg((q - p) / (q - conj p))`, in `(-pi, pi]`.
pub fn angle(p: HPoint, q: HPoint) -> Result<f64, KontsevichError> {
    if p == q {
        return Err(KontsevichError::Coincident(format!("{:?}", p), format!("{:?}", q)));
    }
    let (p, q) = (p.z(), q.z());
    Ok(((q - p) / (q - p.conj())).arg())
}

/// Gradients of `phi(p, q)` with respect to `(x_p, y_p)` and `(x_q, y_q)`.
fn angle_gradient(p: Complex64, q: Complex64) -> ([f64; 2], [f64; 2]) {
    let i = Complex64::i();
    let a = (q - p).inv();
    let b = (q - p.conj()).inv();
    (
        [(-a + b).im, (-i * a - i * b).im],
        [(a - b).im, (i * a - i * b).im],
    )
}

fn determinant(mut m: Vec<Vec<f64>>) -> f64 {
    let n = m.len();
    let mut det = 1.0;
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))
            .expect("non-empty column");
        if m[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        det *= m[c][c];
        for r in (c + 1)..n {
            let f = m[r][c] / m[c][c];
            for k in c..n {
                m[r][k] -= f * m[c][k];
            }
        }
    }
    det
}

const TERRESTRIAL: [f64; 2] = [0.0, 1.0];

fn position(v: Vertex, aerial: &[Complex64]) -> Complex64 {
    match v {
        Vertex::Terrestrial(j) => Complex64::new(TERRESTRIAL[j], 0.0),
        Vertex::Aerial(k) => aerial[k],
    }
}

/// Density of `wedge_e dphi_e` against `dx1 dy1 ... dxn dyn`.
pub fn form_density(g: &KGraph, aerial: &[Complex64]) -> f64 {
    let n = g.n_aerial;
    let mut jac = vec![vec![0.0; 2 * n]; 2 * n];
    for (k, &(first, second)) in g.edges.iter().enumerate() {
        for (slot, target) in [first, second].into_iter().enumerate() {
            let row = &mut jac[2 * k + slot];
            let (dp, dq) = angle_gradient(aerial[k], position(target, aerial));
            row[2 * k] += dp[0];
            row[2 * k + 1] += dp[1];
            if let Vertex::Aerial(l) = target {
                row[2 * l] += dq[0];
                row[2 * l + 1] += dq[1];
            }
        }
    }
    determinant(jac)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Monte Carlo estimate of one graph weight.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightEstimate {
    pub graph: String,
    pub estimate: f64,
    pub std_error: f64,
    pub samples: u64,
    pub seed: u64,
    pub snapped: Option<Rational>,
}

impl WeightEstimate {
    pub fn to_json(&self) -> Value {
        json!({
            "graph": self.graph,
            "estimate": self.estimate,
            "std_error": self.std_error,
            "samples": self.samples,
            "seed": self.seed,
            "snapped": self.snapped.as_ref().map(fmt_rat),
        })
    }
}

/// Closest rational with denominator at most 48, kept only when it lies
/// within three standard errors.
pub fn snap(estimate: f64, std_error: f64) -> Option<Rational> {
    if !estimate.is_finite() || !std_error.is_finite() {
        return None;
    }
    let mut best: Option<(f64, Rational)> = None;
    for d in 1..=48i64 {
        let n = (estimate * d as f64).round();
        if n.abs() > 1e15 {
            return None;
        }
        let r = rat(n as i64, d);
        let dist = (estimate - n / d as f64).abs();
        if best.as_ref().map_or(true, |(b, _)| dist < *b) {
            best = Some((dist, r));
        }
    }
    best.filter(|(d, _)| *d < 3.0 * std_error).map(|(_, r)| r)
}

/// Mixture proposal: each aerial point is drawn around the terrestrial points
/// (half-plane, radius `tan(pi u / 2)`) or around an earlier aerial point
/// (full plane).
fn sample_point(u: [f64; 3], earlier: &[Complex64]) -> Complex64 {
    let k = 2 + earlier.len();
    let idx = ((u[0] * k as f64) as usize).min(k - 1);
    let rho = (PI * u[1] / 2.0).tan();
    if idx < 2 {
        Complex64::new(TERRESTRIAL[idx], 0.0) + Complex64::from_polar(rho, PI * u[2])
    } else {
        earlier[idx - 2] + Complex64::from_polar(rho, 2.0 * PI * u[2])
    }
}

fn proposal_density(p: Complex64, earlier: &[Complex64]) -> f64 {
    let k = (2 + earlier.len()) as f64;
    let radial = |c: Complex64| {
        let r = (p - c).norm();
        1.0 / (PI * PI * r * (1.0 + r * r))
    };
    let mut d = 0.0;
    if p.im > 0.0 {
        d += TERRESTRIAL.iter().map(|&x| 2.0 * radial(Complex64::new(x, 0.0))).sum::<f64>();
    }
    d += earlier.iter().map(|&c| radial(c)).sum::<f64>();
    d / k
}

const MIN_SEPARATION: f64 = 1e-6;

fn separated(aerial: &[Complex64]) -> bool {
    for (k, &p) in aerial.iter().enumerate() {
        if p.im < MIN_SEPARATION {
            return false;
        }
        if TERRESTRIAL.iter().any(|&x| (p - Complex64::new(x, 0.0)).norm() < MIN_SEPARATION) {
            return false;
        }
        if aerial[..k].iter().any(|&q| (p - q).norm() < MIN_SEPARATION) {
            return false;
        }
    }
    true
}

fn sample_value(g: &KGraph, u: &[f64], norm: f64) -> f64 {
    let n = g.n_aerial;
    let mut pts = Vec::with_capacity(n);
    let mut q = 1.0;
    for k in 0..n {
        let p = sample_point([u[3 * k], u[3 * k + 1], u[3 * k + 2]], &pts);
        if p.im <= 0.0 {
            return 0.0;
        }
        q *= proposal_density(p, &pts);
        pts.push(p);
    }
    if !separated(&pts) {
        return 0.0;
    }
    let v = form_density(g, &pts) / (q * norm);
    if v.is_finite() {
        v
    } else {
        0.0
    }
}

const BATCH_PAIRS: u64 = 1 << 14;

/// Antithetic Monte Carlo estimate of `w(g)`. Batches draw from ChaCha8
/// streams derived from `seed`, and partial sums are reduced in batch order,
/// so the result depends only on `(g, samples, seed)`.
pub fn weight_estimate(g: &KGraph, samples: u64, seed: u64) -> Result<WeightEstimate, KontsevichError> {
    if g.has_loop() {
        return Err(KontsevichError::Loop(g.render()));
    }
    if g.m_terrestrial != 2 || g.n_aerial == 0 || g.n_aerial > 2 {
        return Err(KontsevichError::Unsupported(g.render(), "need m = 2 and n in 1..=2".into()));
    }
    if g.edges.iter().any(|(a, b)| a == b) {
        return Err(KontsevichError::Unsupported(g.render(), "double edge".into()));
    }
    let n = g.n_aerial;
    let norm = factorial(n) * (2.0 * PI).powi(2 * n as i32);
    let pairs = (samples / 2).max(1);
    let batches = pairs.div_ceil(BATCH_PAIRS);
    let partial: Vec<(f64, f64)> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let count = BATCH_PAIRS.min(pairs - b * BATCH_PAIRS);
            let mut u = vec![0.0; 3 * n];
            let mut ua = vec![0.0; 3 * n];
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..count {
                for (x, y) in u.iter_mut().zip(ua.iter_mut()) {
                    *x = rng.gen::<f64>();
                    *y = 1.0 - *x;
                }
                let v = 0.5 * (sample_value(g, &u, norm) + sample_value(g, &ua, norm));
                s += v;
                s2 += v * v;
            }
            (s, s2)
        })
        .collect();
    let (s, s2) = partial.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let nf = pairs as f64;
    let mean = s / nf;
    let var = if pairs > 1 { ((s2 / nf - mean * mean) * nf / (nf - 1.0)).max(0.0) } else { f64::INFINITY };
    let std_error = (var / nf).sqrt();
    Ok(WeightEstimate {
        graph: g.render(),
        estimate: mean,
        std_error,
        samples: 2 * pairs,
        seed,
        snapped: snap(mean, std_error),
    })
}

/// Gauss-Legendre nodes and weights on `(0, 1)`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (1..=n)
        .map(|i| {
            let mut x = (PI * (i as f64 - 0.25) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            ((x + 1.0) / 2.0, w / 2.0)
        })
        .collect()
}

/// Tanh-sinh nodes on `(0, 1)` as `(s, 1 - s, weight)`; both ends are
/// computed without cancellation.
fn tanh_sinh(h: f64, n: i64) -> Vec<(f64, f64, f64)> {
    (-n..=n)
        .filter_map(|k| {
            let t = k as f64 * h;
            let u = PI / 2.0 * t.sinh();
            let s = 1.0 / (1.0 + (-2.0 * u).exp());
            let c = 1.0 / (1.0 + (2.0 * u).exp());
            let w = h * PI / 2.0 * t.cosh() / (u.cosh() * u.cosh()) / 2.0;
            (s > 0.0 && c > 0.0 && w > 0.0 && w.is_finite()).then_some((s, c, w))
        })
        .collect()
}

/// The wheel `p1->(q1,p2); p2->(q2,p1)`.
pub fn wheel_graph() -> KGraph {
    KGraph::parse("n=2 m=2; p1->(q1,p2); p2->(q2,p1)").expect("wheel text")
}

/// Integrand of the wheel in polar coordinates `p1 = r1 e^{i t1}`,
/// `p2 = 1 + r2 e^{i t2}` after the two terrestrial angles are integrated
/// out as `2 dt1` and `2 dt2`.
fn wheel_radial(t1: f64, t2: f64, r1: f64, r2: f64) -> f64 {
    let e1 = Complex64::from_polar(1.0, t1);
    let e2 = Complex64::from_polar(1.0, t2);
    let p1 = e1 * r1;
    let p2 = Complex64::new(1.0, 0.0) + e2 * r2;
    let a = p2 - p1;
    let b = p2 - p1.conj();
    let c = p1 - p2;
    let d = p1 - p2.conj();
    let f12_r1 = (-e1 / a).im - (-e1.conj() / b).im;
    let f12_r2 = (e2 / a).im - (e2 / b).im;
    let f21_r1 = (e1 / c).im - (e1 / d).im;
    let f21_r2 = (-e2 / c).im - (-e2.conj() / d).im;
    f12_r1 * f21_r2 - f12_r2 * f21_r1
}

/// Radial integral of the wheel integrand at fixed angles, in coordinates
/// `R = r1 + r2`, `sigma = r1 / R`. Both the crossing point of the rays and
/// the ridge of nearly parallel rays sit at `r1 sin t1 = r2 sin t2`, so sigma
/// is split there; `R` is split at the crossing when the rays meet.
pub fn wheel_radial_integral(t1: f64, t2: f64, h: f64, n: i64) -> f64 {
    let nodes = tanh_sinh(h, n);
    let sigma_star = t2.sin() / (t1.sin() + t2.sin());
    let sig_cuts = [0.0, sigma_star, 1.0];
    let mut r_cuts = vec![0.0, 1.0];
    if t1 < t2 {
        // r1 e1 = 1 + r2 e2
        let det = -t1.cos() * t2.sin() + t2.cos() * t1.sin();
        let r1 = -t2.sin() / det;
        let r2 = -t1.sin() / det;
        if r1 > 0.0 && r2 > 0.0 {
            let big_r = r1 + r2;
            r_cuts = vec![0.0, big_r / (1.0 + big_r), 1.0];
        }
    }
    let mut total = 0.0;
    for wr in r_cuts.windows(2) {
        let (a, b) = (wr[0], wr[1]);
        for &(s, c, w) in &nodes {
            let sr = a + (b - a) * s;
            let cr = (1.0 - b) + (b - a) * c;
            let big_r = sr / cr;
            let wt_r = (b - a) * w / (cr * cr) * big_r;
            for ws in sig_cuts.windows(2) {
                let (lo, hi) = (ws[0], ws[1]);
                for &(s, c, w) in &nodes {
                    let sigma = lo + (hi - lo) * s;
                    let tau = (1.0 - hi) + (hi - lo) * c;
                    let v = wheel_radial(t1, t2, big_r * sigma, big_r * tau);
                    if v.is_finite() {
                        total += wt_r * (hi - lo) * w * v;
                    }
                }
            }
        }
    }
    total
}

/// Deterministic quadrature of `w(wheel)`: tanh-sinh in the radii, Duffy
/// Gauss-Legendre on both triangles of the angle square.
#[derive(Clone, Debug, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// Difference to the same rule at twice the step.
    pub error: f64,
    pub snapped: Option<Rational>,
}

pub fn wheel_quadrature() -> Quadrature {
    let run = |h: f64, n: i64| -> f64 {
        let gl = gauss_legendre(4);
        let mut pts = Vec::new();
        for upper in [true, false] {
            for &(a, wa) in &gl {
                for &(b, wb) in &gl {
                    let x = PI * a;
                    let y = PI * a * b;
                    let w = PI * PI * a * wa * wb;
                    pts.push(if upper { (y, x, w) } else { (x, y, w) });
                }
            }
        }
        let total: f64 = pts
            .par_iter()
            .map(|&(t1, t2, w)| w * wheel_radial_integral(t1, t2, h, n))
            .collect::<Vec<_>>()
            .iter()
            .sum();
        4.0 * total / (factorial(2) * (2.0 * PI).powi(4))
    };
    let fine = run(1.0 / 32.0, 160);
    let coarse = run(1.0 / 16.0, 80);
    let error = (fine - coarse).abs().max(1e-9);
    Quadrature {
        value: fine,
        error,
        snapped: snap(fine, error.max(1e-6)),
    }
}

/// Weights per class, keyed by canonical representative.
pub type Weights = BTreeMap<KGraph, Rational>;

fn members_operator(class: &GraphClass, lam: &PoissonTensor) -> Result<DiffOp, KontsevichError> {
    let n = class.representative.n_aerial;
    let mut op = DiffOp::zero(lam.chart(), 2);
    for (g, s) in &class.members {
        if *s != 0 {
            op = op.add(&operator_from_graph(g, lam)?.scale(&int(*s as i64)));
        }
    }
    // B_G is multilinear in n copies of alpha = Lambda / 2
    Ok(op.scale(&rat(1, 1 << n)))
}

/// `C_1 = (1/2) Lambda d (x) d` and `C_2 = sum_G w_G B_G(Lambda / 2)` over
/// all standard two-point graphs with two aerial vertices.
pub fn order2_product(lam: &PoissonTensor, weights: &Weights) -> Result<BiStar, KontsevichError> {
    let classes = enumerate_graphs(2, 2, false)?;
    let mut c2 = DiffOp::zero(lam.chart(), 2);
    for c in &classes {
        let w = weights
            .get(&c.representative)
            .ok_or_else(|| KontsevichError::MissingWeight(c.representative.render()))?;
        if !w.is_zero() {
            c2 = c2.add(&members_operator(c, lam)?.scale(w));
        }
    }
    Ok(BiStar {
        chart: lam.chart(),
        cochains: vec![first_order_cochain(lam), c2],
    })
}

/// `sum_{i+j=k} C_i(C_j(f,g),h) - C_i(f,C_j(g,h))`.
pub fn associativity_defect(
    star: &dyn StarCochains,
    k: usize,
    f: &Trunc,
    g: &Trunc,
    h: &Trunc,
) -> Result<Trunc, BidiffError> {
    let mut out = Trunc::zero(star.chart());
    for i in 0..=k {
        let j = k - i;
        out = out.add(&star.cochain(i, &star.cochain(j, f, g)?, h)?);
        out = out.sub(&star.cochain(i, f, &star.cochain(j, g, h)?)?);
    }
    Ok(out)
}

/// Gl(2)* linear Poisson tensor in the matrix coordinates.
pub fn linear_tensor() -> PoissonTensor {
    let p = |s: &str| Poly::parse(ORDINARY, s).expect("linear tensor entry");
    PoissonTensor::from_upper(
        ORDINARY,
        &[
            ((0, 1), p("b")),
            ((0, 2), p("-c")),
            ((1, 2), p("a - d")),
            ((1, 3), p("b")),
            ((2, 3), p("-c")),
            ((0, 3), p("0")),
        ],
        Trust::Exact,
    )
}

/// Constant symplectic tensor `{a,b} = {c,d} = 1`.
pub fn constant_tensor() -> PoissonTensor {
    let one = Poly::one(ORDINARY);
    PoissonTensor::from_upper(ORDINARY, &[((0, 1), one.clone()), ((2, 3), one)], Trust::Exact)
}

/// Exact order-2 weights with their derivation.
#[derive(Clone, Debug)]
pub struct SolvedWeights {
    pub classes: Vec<GraphClass>,
    pub weights: Weights,
    /// Classes left free by associativity and mirror symmetry, pinned by
    /// quadrature: `(class index, quadrature)`.
    pub pinned: Vec<(usize, Quadrature)>,
    pub system: LinSystem,
}

impl SolvedWeights {
    pub fn weight(&self, class: usize) -> &Rational {
        &self.weights[&self.classes[class].representative]
    }

    pub fn to_json(&self) -> Value {
        json!({
            "classes": self.classes.iter().map(|c| json!({
                "graph": c.representative.render(),
                "members": c.members.len(),
                "weight": fmt_rat(&self.weights[&c.representative]),
            })).collect::<Vec<_>>(),
            "pinned_by_quadrature": self.pinned.iter().map(|(i, q)| json!({
                "graph": self.classes[*i].representative.render(),
                "value": q.value,
                "error": q.error,
            })).collect::<Vec<_>>(),
            "rows": self.system.len(),
        })
    }
}

fn unknown_label(g: &KGraph) -> String {
    format!("w[{}]", g.render())
}

/// Monomials `x_u` and `x_u x_v` of the matrix coordinates.
fn test_functions() -> Vec<Trunc> {
    let v = Poly::vars(ORDINARY);
    let mut out: Vec<Trunc> = v.iter().cloned().map(Trunc::exact).collect();
    for i in 0..4 {
        for j in i..4 {
            out.push(Trunc::exact(&v[i] * &v[j]));
        }
    }
    out
}

/// Determine the weights of the standard two-point graphs with two aerial
/// vertices from (i) vanishing of the order-2 associator for three Poisson
/// tensors (quadratic, linear, constant) and (ii) the mirror relation
/// `w(mirror G) = (-1)^n w(G)`. Directions these leave free are pinned by
/// the deterministic quadrature.
pub fn solve_weights() -> Result<SolvedWeights, KontsevichError> {
    let classes = enumerate_graphs(2, 2, false)?;
    let labels: Vec<String> = classes.iter().map(|c| unknown_label(&c.representative)).collect();
    let label_refs: Vec<&str> = labels.iter().map(String::as_str).collect();
    let mut sys = LinSystem::new(&label_refs);
    let nk = classes.len();

    for (k, c) in classes.iter().enumerate() {
        let mirrored = c.representative.mirror();
        let (j, s) = classify(&classes, &mirrored)
            .ok_or_else(|| KontsevichError::Unsupported(mirrored.render(), "mirror not enumerated".into()))?;
        let mut row = vec![Rational::zero(); nk];
        // (-1)^n w_k = s w_j with n = 2
        row[k] += int(1);
        row[j] -= int(s as i64);
        sys.push(
            row,
            Rational::zero(),
            Some(Provenance {
                left: "mirror".into(),
                right: c.representative.render(),
                monomial: String::new(),
                t_order: 2,
            }),
        )?;
    }

    let fns = test_functions();
    for (name, lam) in [("quadratic", crate::poisson::ordinary_tensor()), ("linear", linear_tensor()), ("constant", constant_tensor())] {
        let ops: Vec<DiffOp> = classes.iter().map(|c| members_operator(c, &lam)).collect::<Result<_, _>>()?;
        let per_op: Vec<BiStar> = ops
            .iter()
            .map(|op| BiStar {
                chart: lam.chart(),
                cochains: vec![DiffOp::zero(lam.chart(), 2), op.clone()],
            })
            .collect();
        let base = BiStar {
            chart: lam.chart(),
            cochains: vec![first_order_cochain(&lam), DiffOp::zero(lam.chart(), 2)],
        };
        let nf = fns.len();
        let triples: Vec<(usize, usize, usize)> = (0..nf)
            .flat_map(|a| (0..nf).flat_map(move |b| (0..nf).map(move |c| (a, b, c))))
            .collect();
        let rows: Vec<Result<Vec<(Vec<Rational>, Rational, Provenance)>, BidiffError>> = triples
            .par_iter()
            .map(|&(a, b, c)| {
                let (f, g, h) = (&fns[a], &fns[b], &fns[c]);
                let d0 = associativity_defect(&base, 2, f, g, h)?;
                let lin: Vec<Trunc> = per_op
                    .iter()
                    .map(|s| associativity_defect(s, 2, f, g, h))
                    .collect::<Result<_, _>>()?;
                let mut mons = std::collections::BTreeSet::new();
                for p in lin.iter().chain(std::iter::once(&d0)) {
                    mons.extend(p.poly.terms().map(|(m, _)| m.clone()));
                }
                Ok(mons
                    .into_iter()
                    .map(|m| {
                        (
                            lin.iter().map(|l| l.poly.coeff(&m)).collect(),
                            -d0.poly.coeff(&m),
                            Provenance {
                                left: name.into(),
                                right: format!("{} | {} | {}", f.poly.render(), g.poly.render(), h.poly.render()),
                                monomial: m.render(ORDINARY),
                                t_order: 2,
                            },
                        )
                    })
                    .collect())
            })
            .collect();
        for r in rows {
            for (c, rhs, p) in r? {
                sys.push(c, rhs, Some(p))?;
            }
        }
    }

    let unit = |k: usize| -> Vec<Rational> { (0..nk).map(|j| if j == k { int(1) } else { int(0) }).collect() };
    let free: Vec<usize> = (0..nk).filter(|&k| !coeffs_in_row_space(&sys, &unit(k))).collect();
    let wheel = wheel_graph();
    let (wheel_class, wheel_sign) = classify(&classes, &wheel).expect("wheel is a standard graph");
    let mut pinned = Vec::new();
    for &k in &free {
        if k != wheel_class {
            return Err(KontsevichError::Undetermined(classes[k].representative.render()));
        }
        let q = wheel_quadrature();
        let value = q
            .snapped
            .clone()
            .ok_or_else(|| KontsevichError::Undetermined(format!("wheel quadrature {} did not snap", q.value)))?;
        sys.push(
            unit(k),
            value * int(wheel_sign as i64),
            Some(Provenance {
                left: "quadrature".into(),
                right: wheel.render(),
                monomial: String::new(),
                t_order: 2,
            }),
        )?;
        pinned.push((k, q));
    }
    let sol = match solve_or_certificate(&sys) {
        Outcome::Solution(s) if s.nullity == 0 => s,
        Outcome::Solution(_) => return Err(KontsevichError::Undetermined("null space remains".into())),
        Outcome::Infeasible(_) => return Err(KontsevichError::Inconsistent),
    };
    let weights = classes
        .iter()
        .zip(sol.assignment)
        .map(|(c, w)| (c.representative.clone(), w))
        .collect();
    Ok(SolvedWeights {
        classes,
        weights,
        pinned,
        system: sys,
    })
}

/// Weight of a single graph implied by class weights: `sign * w(class)`.
pub fn graph_weight(classes: &[GraphClass], weights: &Weights, g: &KGraph) -> Option<Rational> {
    let (k, s) = classify(classes, g)?;
    Some(weights.get(&classes[k].representative)? * int(s as i64))
}

/// Floating value of a rational, for comparisons with estimates.
pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poisson::ordinary_tensor;
    use proptest::{prop_assert, prop_assume, proptest};

    fn wedge() -> KGraph {
        KGraph::parse("n=1 m=2; p1->(q1,q2)").unwrap()
    }

    #[test]
    fn angle_rejects_coincidence() {
        let p = HPoint::aerial(0.3, 0.5).unwrap();
        assert!(angle(p, p).is_err());
        assert!(HPoint::aerial(0.0, 0.0).is_err());
    }

    #[test]
    fn angle_to_origin_is_twice_the_polar_angle() {
        let p = HPoint::aerial(0.0, 1.0).unwrap();
        assert!((angle(p, HPoint::boundary(0.0)).unwrap().abs() - PI).abs() < 1e-12);
        let p = HPoint::aerial(1.0, 1.0).unwrap();
        assert!((angle(p, HPoint::boundary(0.0)).unwrap() - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = 1e-6;
        for _ in 0..200 {
            let p = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(0.1..2.0));
            let q = Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(0.1..2.0));
            let phi = |p: Complex64, q: Complex64| ((q - p) / (q - p.conj())).arg();
            let (dp, dq) = angle_gradient(p, q);
            let fd = [
                phi(p + h, q) - phi(p - h, q),
                phi(p + Complex64::i() * h, q) - phi(p - Complex64::i() * h, q),
                phi(p, q + h) - phi(p, q - h),
                phi(p, q + Complex64::i() * h) - phi(p, q - Complex64::i() * h),
            ];
            if fd.iter().any(|d| d.abs() > 1.0) {
                continue; // crossed the branch cut
            }
            for (a, d) in [dp[0], dp[1], dq[0], dq[1]].iter().zip(fd) {
                assert!((a - d / (2.0 * h)).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn mixed_partials_commute() {
        // closedness of dphi: d/dy (dphi/dx) = d/dx (dphi/dy) in the aerial slot
        let h = 1e-5;
        let p = Complex64::new(0.37, 0.81);
        let q = Complex64::new(1.3, 0.4);
        let gx = |p: Complex64| angle_gradient(p, q).0[0];
        let gy = |p: Complex64| angle_gradient(p, q).0[1];
        let dy_gx = (gx(p + Complex64::i() * h) - gx(p - Complex64::i() * h)) / (2.0 * h);
        let dx_gy = (gy(p + h) - gy(p - h)) / (2.0 * h);
        assert!((dy_gx - dx_gy).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn angle_reflection_and_scaling(x in -3.0f64..3.0, y in 0.1f64..3.0, u in -3.0f64..3.0, v in 0.0f64..3.0, k in 0.2f64..5.0) {
            let p = HPoint::aerial(x, y).unwrap();
            let q = HPoint { x: u, y: v };
            prop_assume!((x - u).abs() + (y - v).abs() > 1e-3);
            let a = angle(p, q).unwrap();
            let r = angle(HPoint { x: -x, y }, HPoint { x: -u, y: v }).unwrap();
            let wrapped = (a + r).rem_euclid(2.0 * PI);
            prop_assert!(wrapped < 1e-9 || (2.0 * PI - wrapped) < 1e-9);
            let s = angle(HPoint { x: k * x, y: k * y }, HPoint { x: k * u, y: k * v }).unwrap();
            prop_assert!((a - s).abs() < 1e-9);
        }
    }

    #[test]
    fn snap_respects_tolerance() {
        assert_eq!(snap(0.5002, 1e-3), Some(rat(1, 2)));
        assert_eq!(snap(0.51, 1e-5), None);
        assert_eq!(snap(-0.020835, 1e-5), Some(rat(-1, 48)));
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let gl = gauss_legendre(4);
        let i: f64 = gl.iter().map(|(x, w)| w * x.powi(7)).sum();
        assert!((i - 1.0 / 8.0).abs() < 1e-14);
    }

    #[test]
    fn radial_integral_matches_closed_form() {
        for (t1, t2) in [(0.3, 0.8), (0.8, 0.3), (1.5, 1.45), (0.2, 3.0)] {
            let got = wheel_radial_integral(t1, t2, 1.0 / 32.0, 160);
            let exact = 2.0 * f64::min(t1, t2) * (f64::max(t1, t2) - PI);
            assert!((got - exact).abs() < 1e-7, "{t1} {t2}: {got} vs {exact}");
        }
    }

    #[test]
    fn wheel_quadrature_snaps() {
        let q = wheel_quadrature();
        assert_eq!(q.snapped, Some(rat(-1, 48)), "{q:?}");
    }

    #[test]
    fn wedge_estimate_is_half_and_reproducible() {
        let a = weight_estimate(&wedge(), 200_000, 11).unwrap();
        let b = weight_estimate(&wedge(), 200_000, 11).unwrap();
        assert_eq!(a, b);
        assert!((a.estimate - 0.5).abs() < 3.0 * a.std_error + 1e-3, "{a:?}");
        let c = weight_estimate(&wedge(), 200_000, 12).unwrap();
        let comb = (a.std_error.powi(2) + c.std_error.powi(2)).sqrt();
        assert!((a.estimate - c.estimate).abs() < 3.0 * comb);
    }

    #[test]
    fn loop_graphs_are_rejected() {
        let g = KGraph::parse("n=1 m=2; p1->(q1,p1)").unwrap();
        assert!(matches!(weight_estimate(&g, 100, 0), Err(KontsevichError::Loop(_))));
    }

    #[test]
    fn solved_weights_make_the_product_associative() {
        let sw = solve_weights().unwrap();
        let dw = KGraph::parse("n=2 m=2; p1->(q1,q2); p2->(q1,q2)").unwrap();
        assert_eq!(graph_weight(&sw.classes, &sw.weights, &dw), Some(rat(1, 8)));
        assert_eq!(graph_weight(&sw.classes, &sw.weights, &wheel_graph()), Some(rat(-1, 48)));
        let star = order2_product(&ordinary_tensor(), &sw.weights).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let random_poly = |rng: &mut ChaCha8Rng| {
            let fns = test_functions();
            let mut p = Poly::constant(ORDINARY, int(rng.gen_range(-3..=3)));
            for f in &fns {
                p = &p + &f.poly.scale(&int(rng.gen_range(-3..=3)));
            }
            Trunc::exact(p)
        };
        for _ in 0..20 {
            let (f, g, h) = (random_poly(&mut rng), random_poly(&mut rng), random_poly(&mut rng));
            for k in 0..=2 {
                assert!(associativity_defect(&star, k, &f, &g, &h).unwrap().poly.is_zero());
            }
        }
        let zero: Weights = sw.weights.keys().map(|k| (k.clone(), Rational::zero())).collect();
        let bad = order2_product(&ordinary_tensor(), &zero).unwrap();
        let v = Poly::vars(ORDINARY);
        let nonzero = (0..4).any(|i| {
            (0..4).any(|j| {
                (0..4).any(|k| {
                    let t = |p: &Poly| Trunc::exact(p.clone());
                    !associativity_defect(&bad, 2, &t(&(&v[i] * &v[j])), &t(&v[j]), &t(&v[k])).unwrap().poly.is_zero()
                })
            })
        });
        assert!(nonzero);
    }

    #[test]
    fn missing_weight_is_named() {
        let err = order2_product(&ordinary_tensor(), &Weights::new()).unwrap_err();
        assert!(matches!(err, KontsevichError::MissingWeight(_)));
    }
}
