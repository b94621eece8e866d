//! The Takhtajan star product on GL(2) matrix coordinates.
//!
//! `F` is expanded as an exact series of 4x4 rational matrices; products of
//! coordinates are read off `F^{-1} (T (x) T) F`. Basis vectors of `C^2 (x) C^2`
//! are indexed `2i + j`, and the coordinate `t_ij` is variable `2i + j` of the
//! ordinary chart.

use crate::exactmath::{
    int, rat, series_substitute, scalar_series_expand, Chart, ClosedForm, MathError, Mono, Poly, RSeries,
    Rational, TSeries, Trunc, Trust, DOUBLED, EXPONENTIAL, ORDINARY,
};
use crate::bidiff::{BidiffError, StarCochains};
use crate::poisson::{exp_chart_functions, ordinary_tensor};
use num_traits::{One, Zero};
use serde_json::{json, Value};
use std::collections::BTreeMap;

/// 4x4 matrix of scalar series in `t`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MatSeries {
    pub entries: Vec<Vec<RSeries>>,
}

impl MatSeries {
    pub fn t_order(&self) -> usize {
        self.entries[0][0].order()
    }

    pub fn identity(order: usize) -> Self {
        MatSeries {
            entries: (0..4)
                .map(|i| (0..4).map(|j| if i == j { RSeries::one(order) } else { RSeries::zero(order) }).collect())
                .collect(),
        }
    }

    pub fn mul(&self, o: &MatSeries) -> MatSeries {
        let n = self.t_order().min(o.t_order());
        MatSeries {
            entries: (0..4)
                .map(|i| {
                    (0..4)
                        .map(|j| (0..4).fold(RSeries::zero(n), |acc, k| acc.add(&self.entries[i][k].mul(&o.entries[k][j]))))
                        .collect()
                })
                .collect(),
        }
    }

    pub fn add(&self, o: &MatSeries) -> MatSeries {
        MatSeries {
            entries: (0..4).map(|i| (0..4).map(|j| self.entries[i][j].add(&o.entries[i][j])).collect()).collect(),
        }
    }

    pub fn scale(&self, k: &Rational) -> MatSeries {
        MatSeries {
            entries: self.entries.iter().map(|r| r.iter().map(|s| s.scale(k)).collect()).collect(),
        }
    }

    /// Coefficient matrix of `t^k`.
    pub fn coeff(&self, k: usize) -> Vec<Vec<Rational>> {
        self.entries.iter().map(|r| r.iter().map(|s| s.coeff(k)).collect()).collect()
    }

    /// Formal inverse of a series with `F(0) = I`.
    pub fn inverse(&self) -> Result<MatSeries, MathError> {
        let order = self.t_order();
        let id = MatSeries::identity(order);
        if self.coeff(0) != id.coeff(0) {
            return Err(MathError::NonUnitConstant("F(0) is not the identity".into()));
        }
        let minus_n = self.add(&id.scale(&int(-1))).scale(&int(-1));
        let mut acc = id.clone();
        let mut power = id;
        for _ in 0..order {
            power = power.mul(&minus_n);
            acc = acc.add(&power);
        }
        Ok(acc)
    }
}

fn permutation(order: usize) -> MatSeries {
    let mut m = MatSeries {
        entries: vec![vec![RSeries::zero(order); 4]; 4],
    };
    for i in 0..2 {
        for j in 0..2 {
            m.entries[2 * j + i][2 * i + j] = RSeries::one(order);
        }
    }
    m
}

/// `F = exp(-tP/2) M` with `M` built from `q = e^t`,
/// `u = sqrt(2/(q+q^-1))`, `v = (q-q^-1)/sqrt(2(q+q^-1))`.
pub fn f_matrix(t_order: usize) -> Result<MatSeries, MathError> {
    let n = t_order;
    let half = rat(1, 2);
    // P^2 = I, so exp(-tP/2) = cosh(t/2) I - sinh(t/2) P
    let p = permutation(n);
    let cosh = RSeries::cosh_kt(&half, n);
    let sinh = RSeries::sinh_kt(&half, n);
    let exp_p = MatSeries {
        entries: (0..4)
            .map(|i| {
                (0..4)
                    .map(|j| {
                        let diag = if i == j { cosh.clone() } else { RSeries::zero(n) };
                        diag.sub(&p.entries[i][j].mul(&sinh))
                    })
                    .collect()
            })
            .collect(),
    };
    let sqrt_q = scalar_series_expand(&ClosedForm::Exp(half.clone()), n)?;
    let u_inv = scalar_series_expand(&ClosedForm::SqrtCosh, n)?;
    let u = u_inv.reciprocal()?;
    let v = RSeries::sinh_kt(&int(1), n).mul(&u);
    let z = RSeries::zero(n);
    let m = MatSeries {
        entries: vec![
            vec![sqrt_q.clone(), z.clone(), z.clone(), z.clone()],
            vec![z.clone(), u_inv, z.clone(), z.clone()],
            vec![z.clone(), v, u, z.clone()],
            vec![z.clone(), z.clone(), z, sqrt_q],
        ],
    };
    Ok(exp_p.mul(&m))
}

/// All sixteen ordered products of coordinate functions.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct StarTable {
    t_order: usize,
    products: BTreeMap<(usize, usize), TSeries>,
}

impl StarTable {
    pub fn t_order(&self) -> usize {
        self.t_order
    }

    /// `x_u * x_v` for ordinary-chart variables `u, v`.
    pub fn product(&self, u: usize, v: usize) -> &TSeries {
        &self.products[&(u, v)]
    }

    pub fn products(&self) -> impl Iterator<Item = (&(usize, usize), &TSeries)> {
        self.products.iter()
    }

    /// Star product of two polynomials of degree at most one, extended
    /// bilinearly with `1` as unit.
    pub fn star_affine(&self, f: &Poly, g: &Poly) -> TSeries {
        assert!(f.total_degree().unwrap_or(0) <= 1 && g.total_degree().unwrap_or(0) <= 1);
        let n = self.t_order;
        let f0 = f.constant_term();
        let g0 = g.constant_term();
        let mut out = TSeries::from_poly(&(f.scale(&g0) + g.scale(&f0)) - Poly::constant(ORDINARY, &f0 * &g0), n, Trust::Exact);
        for u in 0..4 {
            let fu = f.coeff(&Mono::var(4, u));
            if fu.is_zero() {
                continue;
            }
            for v in 0..4 {
                let gv = g.coeff(&Mono::var(4, v));
                if !gv.is_zero() {
                    out = out.add(&self.product(u, v).scale(&(&fu * &gv)));
                }
            }
        }
        out
    }

    /// JSON dump `"a*d" -> ["a*d", "b*c", "0"]`.
    pub fn to_json(&self) -> Value {
        let mut m = serde_json::Map::new();
        for ((u, v), s) in &self.products {
            m.insert(format!("{}*{}", ORDINARY.vars[*u], ORDINARY.vars[*v]), json!(s.render()));
        }
        Value::Object(m)
    }
}

impl StarCochains for StarTable {
    fn chart(&self) -> Chart {
        ORDINARY
    }

    fn max_order(&self) -> usize {
        self.t_order
    }

    /// Defined on affine functions of the matrix coordinates only.
    fn cochain(&self, k: usize, f: &Trunc, g: &Trunc) -> Result<Trunc, BidiffError> {
        if k == 0 {
            return Ok(f.mul(g));
        }
        if k > self.t_order {
            return Err(BidiffError::MissingOrder(k));
        }
        for h in [f, g] {
            if h.chart() != ORDINARY {
                return Err(BidiffError::Domain(format!("expected chart {}", ORDINARY.name)));
            }
            if h.poly.total_degree().unwrap_or(0) > 1 {
                return Err(BidiffError::Domain(format!("non-affine argument {}", h.poly.render())));
            }
        }
        let s = self.star_affine(&f.poly, &g.poly);
        Ok(Trunc::new(s.coeff(k).clone(), f.trust.min(g.trust)))
    }
}

/// Read `t_ik * t_jl` from slot `((i,j),(k,l))` of `F^{-1} (T (x) T) F`.
pub fn star_table(t_order: usize) -> Result<StarTable, MathError> {
    let f = f_matrix(t_order)?;
    let finv = f.inverse()?;
    let t = |p: usize, r: usize| Poly::var(ORDINARY, 2 * p + r);
    let mut products = BTreeMap::new();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    let row = 2 * i + j;
                    let col = 2 * k + l;
                    let mut coeffs = vec![Poly::zero(ORDINARY); t_order + 1];
                    for m in 0..4 {
                        for n in 0..4 {
                            let s = finv.entries[row][m].mul(&f.entries[n][col]);
                            if s.0.iter().all(Zero::is_zero) {
                                continue;
                            }
                            let (p, q) = (m / 2, m % 2);
                            let (r, w) = (n / 2, n % 2);
                            let mono = t(p, r) * t(q, w);
                            for (e, c) in s.0.iter().enumerate() {
                                coeffs[e] = &coeffs[e] + mono.scale(c);
                            }
                        }
                    }
                    products.insert((2 * i + k, 2 * j + l), TSeries::new(coeffs, Trust::Exact));
                }
            }
        }
    }
    Ok(StarTable { t_order, products })
}

/// First-order cochain and symmetric second-order cochain on coordinate pairs.
#[derive(Clone, Debug)]
pub struct Cochains {
    pub chart: Chart,
    pub c1: BTreeMap<(usize, usize), Trunc>,
    pub ct: BTreeMap<(usize, usize), Trunc>,
}

/// Extract `C1` (the `t` coefficient) and `C_T` (symmetric part of the `t^2`
/// coefficient), optionally rewritten in the exponential chart through
/// coordinate degree 2.
pub fn extract_cochains(table: &StarTable, chart: Chart) -> Result<Cochains, MathError> {
    if table.t_order() < 2 {
        return Err(MathError::OrderMismatch(table.t_order(), 2));
    }
    let images: Option<Vec<Option<TSeries>>> = if chart == ORDINARY {
        None
    } else if chart == EXPONENTIAL {
        Some(exp_chart_functions(3)?.into_iter().map(Some).collect())
    } else {
        return Err(MathError::ChartMismatch {
            left: chart.name.into(),
            right: "ordinary|exponential".into(),
        });
    };
    let express = |p: &Poly| -> Result<Trunc, MathError> {
        match &images {
            None => Ok(Trunc::exact(p.clone())),
            Some(img) => {
                let s = series_substitute(p, img)?;
                Ok(s.coeff_trunc(0).truncate(2))
            }
        }
    };
    let mut c1 = BTreeMap::new();
    let mut ct = BTreeMap::new();
    for u in 0..4 {
        for v in 0..4 {
            let uv = table.product(u, v);
            let vu = table.product(v, u);
            let sym = (uv.coeff(2) + vu.coeff(2)).scale(&rat(1, 2));
            c1.insert((u, v), express(uv.coeff(1))?);
            ct.insert((u, v), express(&sym)?);
        }
    }
    Ok(Cochains { chart, c1, ct })
}

/// One axiom check with a human-readable location on failure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomCheck {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

/// Outcome of [`check_axioms`].
#[derive(Clone, Debug, Default)]
pub struct AxiomReport {
    pub checks: Vec<AxiomCheck>,
}

impl AxiomReport {
    pub fn all_ok(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }

    fn push(&mut self, name: &str, failures: Vec<String>, ok_detail: String) {
        self.checks.push(AxiomCheck {
            name: name.into(),
            ok: failures.is_empty(),
            detail: if failures.is_empty() { ok_detail } else { failures.join("; ") },
        });
    }
}

fn var_name(u: usize) -> &'static str {
    ORDINARY.vars[u]
}

/// Verify unit, bracket, associativity and coproduct compatibility through
/// the table's order.
pub fn check_axioms(table: &StarTable) -> AxiomReport {
    let mut rep = AxiomReport::default();
    let n = table.t_order();

    // unit: 1 * u = u * 1 = u, and higher cochains vanish at the identity matrix
    let mut fails = Vec::new();
    let one = Poly::one(ORDINARY);
    let identity = [int(1), int(0), int(0), int(1)];
    for u in 0..4 {
        let x = Poly::var(ORDINARY, u);
        let expect = TSeries::from_poly(x.clone(), n, Trust::Exact);
        if table.star_affine(&one, &x) != expect || table.star_affine(&x, &one) != expect {
            fails.push(format!("1*{0} or {0}*1", var_name(u)));
        }
        for v in 0..4 {
            for k in 1..=n {
                if !table.product(u, v).coeff(k).eval(&identity).is_zero() {
                    fails.push(format!("C{k}({},{}) at identity", var_name(u), var_name(v)));
                }
            }
        }
    }
    rep.push("unit", fails, "1*u = u*1 = u; C_k(u,v)(I) = 0".into());

    // bracket: order 0 commutative, order 1 antisymmetric part equals the Poisson bracket
    let lam = ordinary_tensor();
    let mut fails = Vec::new();
    for u in 0..4 {
        for v in 0..4 {
            let uv = table.product(u, v);
            let vu = table.product(v, u);
            let xu = Poly::var(ORDINARY, u);
            let xv = Poly::var(ORDINARY, v);
            if uv.coeff(0) != &(&xu * &xv) {
                fails.push(format!("order 0 of {}*{}", var_name(u), var_name(v)));
            }
            if n >= 1 && &(uv.coeff(1) - vu.coeff(1)) != lam.entry(u, v) {
                fails.push(format!(
                    "order 1 commutator ({},{}) = {} vs {}",
                    var_name(u),
                    var_name(v),
                    uv.coeff(1) - vu.coeff(1),
                    lam.entry(u, v)
                ));
            }
        }
    }
    rep.push("bracket", fails, "(u*v - v*u)/t -> {u,v} on all 16 pairs".into());

    // associativity via normal forms of cubic words
    let fails = match QuadraticRewriting::new(table) {
        Ok(rw) => {
            let mut f = Vec::new();
            for u in 0..4 {
                for v in 0..4 {
                    for w in 0..4 {
                        let left = rw.normal_form(&[u, v, w], true);
                        let right = rw.normal_form(&[u, v, w], false);
                        if let Some(k) = first_difference(&left, &right) {
                            f.push(format!("({},{},{}) at order {k}", var_name(u), var_name(v), var_name(w)));
                        }
                    }
                }
            }
            f
        }
        Err(e) => vec![e.to_string()],
    };
    rep.push("associativity", fails, "(u*v)*w = u*(v*w) on all 64 coordinate triples".into());

    // coproduct compatibility
    let mut fails = Vec::new();
    for u in 0..4 {
        for v in 0..4 {
            if let Some(k) = coproduct_defect_order(table, u, v) {
                fails.push(format!("Delta({}*{}) at order {k}", var_name(u), var_name(v)));
            }
        }
    }
    rep.push("coproduct", fails, "Delta(u*v) = Delta(u)*Delta(v) on all 16 pairs".into());
    rep
}

/// Normal-ordering rewriting system of the quadratic algebra generated by the
/// coordinates with the table's relations.
///
/// Ordered words `x*y` with `x <= y` span the quadratic part; each reversed
/// word is rewritten onto them through the commutative monomial basis.
pub struct QuadraticRewriting {
    order: usize,
    rules: BTreeMap<(usize, usize), Vec<((usize, usize), RSeries)>>,
}

type Word = Vec<usize>;

impl QuadraticRewriting {
    pub fn new(table: &StarTable) -> Result<Self, MathError> {
        let n = table.t_order();
        let ordered: Vec<(usize, usize)> = (0..4).flat_map(|x| (x..4).map(move |y| (x, y))).collect();
        let mono_of = |x: usize, y: usize| Mono::var(4, x).mul(&Mono::var(4, y));
        // M[m][w]: coefficient of monomial m in ordered word w
        let expand = |s: &TSeries| -> Vec<RSeries> {
            ordered
                .iter()
                .map(|&(x, y)| RSeries((0..=n).map(|k| s.coeff(k).coeff(&mono_of(x, y))).collect()))
                .collect()
        };
        let m: Vec<Vec<RSeries>> = {
            let cols: Vec<Vec<RSeries>> = ordered.iter().map(|&(x, y)| expand(table.product(x, y))).collect();
            (0..ordered.len()).map(|r| (0..ordered.len()).map(|c| cols[c][r].clone()).collect()).collect()
        };
        let minv = invert_unipotent(&m, n)?;
        let mut rules = BTreeMap::new();
        for x in 0..4 {
            for y in 0..x {
                let coeffs = expand(table.product(x, y));
                let mut rule = Vec::new();
                for (w, &pair) in ordered.iter().enumerate() {
                    let c = (0..ordered.len()).fold(RSeries::zero(n), |acc, r| acc.add(&minv[w][r].mul(&coeffs[r])));
                    if !c.0.iter().all(Zero::is_zero) {
                        rule.push((pair, c));
                    }
                }
                rules.insert((x, y), rule);
            }
        }
        Ok(QuadraticRewriting { order: n, rules })
    }

    /// Reduce a word to ordered form, always rewriting the leftmost (or
    /// rightmost) inversion first.
    pub fn normal_form(&self, word: &[usize], leftmost: bool) -> BTreeMap<Word, RSeries> {
        let mut pending: Vec<(Word, RSeries)> = vec![(word.to_vec(), RSeries::one(self.order))];
        let mut done: BTreeMap<Word, RSeries> = BTreeMap::new();
        while let Some((w, c)) = pending.pop() {
            if c.0.iter().all(Zero::is_zero) {
                continue;
            }
            let inversions: Vec<usize> = (0..w.len() - 1).filter(|&p| w[p] > w[p + 1]).collect();
            let pos = if leftmost { inversions.first() } else { inversions.last() };
            match pos {
                None => {
                    let e = done.entry(w).or_insert_with(|| RSeries::zero(self.order));
                    *e = e.add(&c);
                }
                Some(&p) => {
                    for ((x, y), r) in &self.rules[&(w[p], w[p + 1])] {
                        let mut w2 = w.clone();
                        w2[p] = *x;
                        w2[p + 1] = *y;
                        pending.push((w2, c.mul(r)));
                    }
                }
            }
        }
        done.retain(|_, c| !c.0.iter().all(Zero::is_zero));
        done
    }
}

fn first_difference(a: &BTreeMap<Word, RSeries>, b: &BTreeMap<Word, RSeries>) -> Option<usize> {
    let keys: std::collections::BTreeSet<&Word> = a.keys().chain(b.keys()).collect();
    let mut first: Option<usize> = None;
    for k in keys {
        let n = a.get(k).or(b.get(k)).map(|s| s.order()).unwrap_or(0);
        let za = RSeries::zero(n);
        let (x, y) = (a.get(k).unwrap_or(&za), b.get(k).unwrap_or(&za));
        if let Some(o) = (0..=n).find(|&o| x.coeff(o) != y.coeff(o)) {
            first = Some(first.map_or(o, |f| f.min(o)));
        }
    }
    first
}

fn invert_unipotent(m: &[Vec<RSeries>], order: usize) -> Result<Vec<Vec<RSeries>>, MathError> {
    let n = m.len();
    for i in 0..n {
        for j in 0..n {
            let expect = if i == j { Rational::one() } else { Rational::zero() };
            if m[i][j].coeff(0) != expect {
                return Err(MathError::NonUnitConstant("leading block is not the identity".into()));
            }
        }
    }
    let id: Vec<Vec<RSeries>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { RSeries::one(order) } else { RSeries::zero(order) }).collect())
        .collect();
    let minus_n: Vec<Vec<RSeries>> = (0..n).map(|i| (0..n).map(|j| id[i][j].sub(&m[i][j])).collect()).collect();
    let mul = |a: &Vec<Vec<RSeries>>, b: &Vec<Vec<RSeries>>| -> Vec<Vec<RSeries>> {
        (0..n)
            .map(|i| (0..n).map(|j| (0..n).fold(RSeries::zero(order), |acc, k| acc.add(&a[i][k].mul(&b[k][j])))).collect())
            .collect()
    };
    let mut acc = id.clone();
    let mut power = id;
    for _ in 0..order {
        power = mul(&power, &minus_n);
        for i in 0..n {
            for j in 0..n {
                acc[i][j] = acc[i][j].add(&power[i][j]);
            }
        }
    }
    Ok(acc)
}

/// Embed an ordinary-chart polynomial into copy `copy` (0 or 1) of `G x G`.
fn embed(p: &Poly, copy: usize) -> Poly {
    Poly::from_terms(
        DOUBLED,
        p.terms().map(|(m, c)| {
            let mut e = vec![0; 8];
            e[4 * copy..4 * copy + 4].copy_from_slice(&m.0);
            (Mono(e), c.clone())
        }),
    )
}

fn embed_series(s: &TSeries, copy: usize) -> TSeries {
    TSeries::new(s.coeffs().iter().map(|p| embed(p, copy)).collect(), s.trust())
}

/// Coproduct of a polynomial: `t_ij -> sum_k t_ik (x) t_kj`.
pub fn coproduct(p: &Poly) -> Poly {
    let images: Vec<Option<TSeries>> = (0..4)
        .map(|v| {
            let (i, j) = (v / 2, v % 2);
            let mut s = Poly::zero(DOUBLED);
            for k in 0..2 {
                s = s + Poly::var(DOUBLED, 2 * i + k) * Poly::var(DOUBLED, 4 + 2 * k + j);
            }
            Some(TSeries::from_poly(s, 0, Trust::Exact))
        })
        .collect();
    if p.is_zero() {
        return Poly::zero(DOUBLED);
    }
    match series_substitute(p, &images) {
        Ok(s) => s.coeff(0).clone(),
        Err(_) => {
            // constant polynomial: no variable needs an image
            Poly::constant(DOUBLED, p.constant_term())
        }
    }
}

/// Order of the first coefficient where `Delta(u*v)` and `Delta u * Delta v` differ.
pub fn coproduct_defect_order(table: &StarTable, u: usize, v: usize) -> Option<usize> {
    let n = table.t_order();
    let lhs: Vec<Poly> = table.product(u, v).coeffs().iter().map(coproduct).collect();
    let (i, j) = (u / 2, u % 2);
    let (i2, j2) = (v / 2, v % 2);
    let mut rhs = TSeries::zero(DOUBLED, n);
    for k in 0..2 {
        for l in 0..2 {
            let first = embed_series(table.product(2 * i + k, 2 * i2 + l), 0);
            let second = embed_series(table.product(2 * k + j, 2 * l + j2), 1);
            rhs = rhs.add(&first.mul(&second));
        }
    }
    (0..=n).find(|&k| lhs[k] != *rhs.coeff(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::star_relations;

    fn table() -> StarTable {
        star_table(4).unwrap()
    }

    #[test]
    fn twist_is_invertible_and_starts_at_identity() {
        let f = f_matrix(5).unwrap();
        let id = MatSeries::identity(5);
        assert_eq!(f.coeff(0), id.coeff(0));
        assert_eq!(f.mul(&f.inverse().unwrap()), id);
        assert_eq!(f.inverse().unwrap().mul(&f), id);
    }

    #[test]
    fn sqrt_cosh_series_matches_floating_point() {
        let s = scalar_series_expand(&ClosedForm::SqrtCosh, 12).unwrap();
        let t: f64 = 0.1;
        assert!((s.eval_f64(t) - t.cosh().sqrt()).abs() < 1e-14);
        let sq = s.mul(&s);
        assert_eq!(sq, RSeries::cosh_kt(&int(1), 12));
    }

    #[test]
    fn ordered_products_match_closed_form_relations() {
        let tab = table();
        let rels = star_relations(4).unwrap();
        assert_eq!(rels.len(), 10);
        for (u, v, expect) in rels {
            assert_eq!(tab.product(u, v), &expect, "{}*{}", var_name(u), var_name(v));
        }
    }

    #[test]
    fn reversed_products_are_the_reflected_series() {
        let tab = table();
        for u in 0..4 {
            for v in 0..4 {
                let uv = tab.product(u, v);
                let vu = tab.product(v, u);
                for k in 0..=4 {
                    let sign = if k % 2 == 0 { int(1) } else { int(-1) };
                    assert_eq!(vu.coeff(k), &uv.coeff(k).scale(&sign));
                }
            }
        }
    }

    #[test]
    fn axioms_hold_through_order_four() {
        let rep = check_axioms(&table());
        assert_eq!(rep.checks.len(), 4);
        for c in &rep.checks {
            assert!(c.ok, "{}: {}", c.name, c.detail);
        }
    }

    #[test]
    fn perturbed_table_breaks_associativity() {
        let mut tab = star_table(3).unwrap();
        let ab = Poly::var(ORDINARY, 0) * Poly::var(ORDINARY, 1);
        let s = tab.products.get_mut(&(0, 1)).unwrap();
        let mut coeffs = s.coeffs().to_vec();
        coeffs[2] = &coeffs[2] + &ab;
        *s = TSeries::new(coeffs, Trust::Exact);
        let rep = check_axioms(&tab);
        let assoc = rep.checks.iter().find(|c| c.name == "associativity").unwrap();
        assert!(!assoc.ok);
    }

    #[test]
    fn first_order_antisymmetric_part_is_the_bracket() {
        let c = extract_cochains(&table(), ORDINARY).unwrap();
        let lam = ordinary_tensor();
        for u in 0..4 {
            for v in 0..4 {
                let anti = &c.c1[&(u, v)].poly - &c.c1[&(v, u)].poly;
                assert_eq!(&anti, lam.entry(u, v));
            }
        }
    }

    #[test]
    fn symmetric_second_order_values() {
        let c = extract_cochains(&table(), ORDINARY).unwrap();
        let x = Poly::vars(ORDINARY);
        for u in 0..4 {
            for v in 0..4 {
                assert_eq!(c.ct[&(u, v)], c.ct[&(v, u)]);
            }
        }
        assert!(c.ct[&(0, 3)].poly.is_zero());
        assert_eq!(c.ct[&(0, 1)].poly, (&x[0] * &x[1]).scale(&rat(-1, 8)));
        assert_eq!(c.ct[&(1, 2)].poly, (&x[1] * &x[2]).scale(&rat(-1, 2)));
        let e = extract_cochains(&table(), EXPONENTIAL).unwrap();
        assert!(e.ct[&(0, 3)].poly.is_zero());
        assert_eq!(e.ct[&(0, 1)].trust, Trust::Deg(2));
        assert_eq!(e.ct[&(1, 2)].poly.render(), "-1/2*beta*gamma");
    }

    #[test]
    fn cochains_reject_non_affine_arguments() {
        let tab = star_table(2).unwrap();
        let a = Trunc::exact(Poly::var(ORDINARY, 0));
        let a2 = Trunc::exact(&a.poly * &a.poly);
        assert!(matches!(tab.cochain(1, &a2, &a), Err(BidiffError::Domain(_))));
        assert!(matches!(tab.cochain(3, &a, &a), Err(BidiffError::MissingOrder(3))));
        let alpha = Trunc::exact(Poly::var(EXPONENTIAL, 0));
        assert!(matches!(tab.cochain(1, &alpha, &alpha), Err(BidiffError::Domain(_))));
        let b = Trunc::exact(Poly::var(ORDINARY, 1));
        assert_eq!(tab.cochain(1, &a, &b).unwrap().poly, (&a.poly * &b.poly).scale(&rat(1, 2)));
    }

    #[test]
    fn unknown_chart_is_rejected() {
        assert!(extract_cochains(&table(), DOUBLED).is_err());
        assert!(extract_cochains(&star_table(1).unwrap(), ORDINARY).is_err());
    }
}
