//! Exact linear systems with provenance: fraction-free elimination,
//! infeasibility certificates, row-space membership, and assembly of the two
//! coefficient-matching systems.

use crate::bidiff::{
    equivalence_defect, operator_from_schema, BidiffError, BiStar, DiffOp, EquivalenceMap, StarCochains,
};
use crate::exactmath::{fmt_rat, int, Chart, MathError, Mono, Poly, Rational, Trunc, Trust, EXPONENTIAL, ORDINARY};
use crate::graphs::{symmetric_basis, unary_basis};
use crate::poisson::PoissonTensor;
use crate::reference::QuotedRow;
use crate::takhtajan::{extract_cochains, StarTable};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Math(#[from] MathError),
    #[error(transparent)]
    Bidiff(#[from] BidiffError),
    #[error("trusted degree {got} is below the required {need} for pair ({pair})")]
    TrustUnderflow { pair: String, got: String, need: u32 },
    #[error("row has {got} coefficients, system has {expected} unknowns")]
    Width { expected: usize, got: usize },
}

/// Where a row came from.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Provenance {
    pub left: String,
    pub right: String,
    pub monomial: String,
    pub t_order: usize,
}

impl Provenance {
    pub fn render(&self) -> String {
        format!("({},{}) {} @t^{}", self.left, self.right, self.monomial, self.t_order)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Row {
    pub coeffs: Vec<Rational>,
    pub rhs: Rational,
    pub provenance: Vec<Provenance>,
}

/// `A x = b` over the rationals with labelled unknowns.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LinSystem {
    pub unknowns: Vec<String>,
    rows: Vec<Row>,
    pub notes: Vec<String>,
}

impl LinSystem {
    pub fn new(unknowns: &[&str]) -> Self {
        LinSystem {
            unknowns: unknowns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Add a row. `0 = 0` is dropped; an exact duplicate merges provenance.
    pub fn push(&mut self, coeffs: Vec<Rational>, rhs: Rational, provenance: Option<Provenance>) -> Result<(), SolverError> {
        if coeffs.len() != self.unknowns.len() {
            return Err(SolverError::Width {
                expected: self.unknowns.len(),
                got: coeffs.len(),
            });
        }
        if coeffs.iter().all(Zero::is_zero) && rhs.is_zero() {
            return Ok(());
        }
        if let Some(r) = self.rows.iter_mut().find(|r| r.coeffs == coeffs && r.rhs == rhs) {
            r.provenance.extend(provenance);
            return Ok(());
        }
        self.rows.push(Row {
            coeffs,
            rhs,
            provenance: provenance.into_iter().collect(),
        });
        Ok(())
    }

    pub fn render_row(&self, r: &Row) -> String {
        let mut lhs = Vec::new();
        for (c, u) in r.coeffs.iter().zip(&self.unknowns) {
            if !c.is_zero() {
                lhs.push(if c.is_one() { u.clone() } else { format!("{}*{u}", fmt_rat(c)) });
            }
        }
        let lhs = if lhs.is_empty() { "0".into() } else { lhs.join(" + ").replace("+ -", "- ") };
        format!("{lhs} = {}", fmt_rat(&r.rhs))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "unknowns": self.unknowns,
            "rows": self.rows.iter().map(|r| json!({
                "coeffs": r.coeffs.iter().map(fmt_rat).collect::<Vec<_>>(),
                "rhs": fmt_rat(&r.rhs),
                "text": self.render_row(r),
                "provenance": r.provenance.iter().map(Provenance::render).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "notes": self.notes,
        })
    }
}

/// Rational row multipliers combining the system into `0 = nonzero`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub multipliers: Vec<Rational>,
    pub combined_rhs: Rational,
}

impl Certificate {
    pub fn to_json(&self, sys: &LinSystem) -> Value {
        let used: Vec<Value> = self
            .multipliers
            .iter()
            .enumerate()
            .filter(|(_, m)| !m.is_zero())
            .map(|(i, m)| {
                let r = &sys.rows()[i];
                json!({
                    "row": i,
                    "multiplier": fmt_rat(m),
                    "text": sys.render_row(r),
                    "provenance": r.provenance.iter().map(Provenance::render).collect::<Vec<_>>(),
                })
            })
            .collect();
        json!({
            "multipliers": self.multipliers.iter().map(fmt_rat).collect::<Vec<_>>(),
            "combined_rhs": fmt_rat(&self.combined_rhs),
            "support": used,
            "verified": verify_certificate(sys, self),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Solution {
    /// One solution, free unknowns set to zero.
    pub assignment: Vec<Rational>,
    pub nullity: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Solution(Solution),
    Infeasible(Certificate),
}

fn integer_row(coeffs: &[Rational], rhs: &Rational) -> (Vec<BigInt>, BigInt) {
    let lcm = coeffs.iter().chain(std::iter::once(rhs)).fold(BigInt::one(), |l, c| l.lcm(c.denom()));
    let conv = |c: &Rational| (c * Rational::from_integer(lcm.clone())).to_integer();
    (coeffs.iter().map(conv).collect(), conv(rhs))
}

/// Bareiss elimination on `[A | b | I]`. Returns the reduced matrix (rows in
/// final order), pivot columns and per-input-row scale factors.
struct Reduction {
    mat: Vec<Vec<BigInt>>,
    pivots: Vec<usize>,
    scales: Vec<Rational>,
}

fn reduce(sys: &LinSystem) -> Reduction {
    let n = sys.unknowns.len();
    let m = sys.rows.len();
    let mut scales = Vec::with_capacity(m);
    let mut mat: Vec<Vec<BigInt>> = sys
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let (a, b) = integer_row(&r.coeffs, &r.rhs);
            let s = if let Some((k, x)) = a.iter().chain(std::iter::once(&b)).enumerate().find(|(_, x)| !x.is_zero()) {
                let orig = if k < n { &r.coeffs[k] } else { &r.rhs };
                Rational::from_integer(x.clone()) / orig
            } else {
                Rational::one()
            };
            scales.push(s);
            let mut row = a;
            row.push(b);
            row.extend((0..m).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }));
            row
        })
        .collect();
    let width = n + 1 + m;
    let mut prev = BigInt::one();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..n {
        let Some(p) = (r..m).find(|&i| !mat[i][col].is_zero()) else { continue };
        mat.swap(r, p);
        let piv = mat[r][col].clone();
        for i in (r + 1)..m {
            let f = mat[i][col].clone();
            for j in 0..width {
                let v = &piv * &mat[i][j] - &f * &mat[r][j];
                let (q, rem) = v.div_rem(&prev);
                debug_assert!(rem.is_zero(), "Bareiss division must be exact");
                mat[i][j] = q;
            }
        }
        prev = piv;
        pivots.push(col);
        r += 1;
        if r == m {
            break;
        }
    }
    Reduction { mat, pivots, scales }
}

/// Decide `A x = b` exactly.
pub fn solve_or_certificate(sys: &LinSystem) -> Outcome {
    let n = sys.unknowns.len();
    if sys.rows.is_empty() {
        return Outcome::Solution(Solution {
            assignment: vec![Rational::zero(); n],
            nullity: n,
        });
    }
    let red = reduce(sys);
    let rank = red.pivots.len();
    for row in &red.mat[rank..] {
        if !row[n].is_zero() {
            let ys = &row[n + 1..];
            let g = ys.iter().fold(BigInt::zero(), |g, y| g.gcd(y));
            let g = if g.is_zero() { BigInt::one() } else { g };
            let multipliers: Vec<Rational> = ys
                .iter()
                .zip(&red.scales)
                .map(|(y, s)| Rational::from_integer(y / &g) * s)
                .collect();
            let lead = multipliers.iter().find(|m| !m.is_zero()).map(|m| m.abs()).unwrap_or_else(Rational::one);
            let multipliers: Vec<Rational> = multipliers.iter().map(|m| m / &lead).collect();
            let combined_rhs = multipliers.iter().zip(&sys.rows).map(|(l, r)| l * &r.rhs).sum();
            return Outcome::Infeasible(Certificate {
                multipliers,
                combined_rhs,
            });
        }
    }
    let mut x = vec![Rational::zero(); n];
    for (k, &pc) in red.pivots.iter().enumerate().rev() {
        let row = &red.mat[k];
        let mut acc = Rational::from_integer(row[n].clone());
        for j in (pc + 1)..n {
            acc -= Rational::from_integer(row[j].clone()) * &x[j];
        }
        x[pc] = acc / Rational::from_integer(row[pc].clone());
    }
    Outcome::Solution(Solution {
        assignment: x,
        nullity: n - rank,
    })
}

/// Recompute `sum lambda_k row_k` from the raw rows.
pub fn verify_certificate(sys: &LinSystem, cert: &Certificate) -> bool {
    if cert.multipliers.len() != sys.rows.len() {
        return false;
    }
    let n = sys.unknowns.len();
    let mut combo = vec![Rational::zero(); n];
    let mut rhs = Rational::zero();
    for (l, r) in cert.multipliers.iter().zip(&sys.rows) {
        for (c, a) in combo.iter_mut().zip(&r.coeffs) {
            *c += l * a;
        }
        rhs += l * &r.rhs;
    }
    combo.iter().all(Zero::is_zero) && !rhs.is_zero() && rhs == cert.combined_rhs
}

/// Rank by plain rational Gaussian elimination.
pub fn rank(rows: &[Vec<Rational>]) -> usize {
    let mut m: Vec<Vec<Rational>> = rows.to_vec();
    let ncols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = Rational::one() / &m[r][c];
        let pivot_row: Vec<Rational> = m[r].iter().map(|x| x * &inv).collect();
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for (x, y) in m[i].iter_mut().zip(&pivot_row) {
                    *x -= &f * y;
                }
            }
        }
        m[r] = pivot_row;
        r += 1;
    }
    r
}

fn augmented(sys: &LinSystem) -> Vec<Vec<Rational>> {
    sys.rows
        .iter()
        .map(|r| r.coeffs.iter().cloned().chain(std::iter::once(r.rhs.clone())).collect())
        .collect()
}

/// Whether `coeffs . x = rhs` is a rational combination of the system's rows.
pub fn in_row_space(sys: &LinSystem, coeffs: &[Rational], rhs: &Rational) -> bool {
    let mut m = augmented(sys);
    let base = rank(&m);
    m.push(coeffs.iter().cloned().chain(std::iter::once(rhs.clone())).collect());
    rank(&m) == base
}

/// Whether the left-hand side alone lies in the span of the system's left-hand sides.
pub fn coeffs_in_row_space(sys: &LinSystem, coeffs: &[Rational]) -> bool {
    let mut m: Vec<Vec<Rational>> = sys.rows.iter().map(|r| r.coeffs.clone()).collect();
    let base = rank(&m);
    m.push(coeffs.to_vec());
    rank(&m) == base
}

/// System built from quoted rows.
pub fn system_from_rows(unknowns: &[&str], rows: &[QuotedRow]) -> LinSystem {
    let mut s = LinSystem::new(unknowns);
    for (i, r) in rows.iter().enumerate() {
        s.push(
            r.coeffs.clone(),
            r.rhs.clone(),
            Some(Provenance {
                left: "quoted".into(),
                right: format!("row {}", i + 1),
                monomial: String::new(),
                t_order: 2,
            }),
        )
        .expect("quoted row width");
    }
    s
}

/// Outcome of solving the leading rows and evaluating a further row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForwardSubstitution {
    pub solution: Option<Vec<Rational>>,
    /// Whether the checked row's value is the same for every solution.
    pub determined: bool,
    pub lhs: Option<Rational>,
    pub rhs: Rational,
}

/// Solve `rows` and evaluate `check` at the solution.
pub fn forward_substitute(unknowns: &[&str], rows: &[QuotedRow], check: &QuotedRow) -> ForwardSubstitution {
    let sys = system_from_rows(unknowns, rows);
    match solve_or_certificate(&sys) {
        Outcome::Infeasible(_) => ForwardSubstitution {
            solution: None,
            determined: false,
            lhs: None,
            rhs: check.rhs.clone(),
        },
        Outcome::Solution(s) => {
            let lhs = check.coeffs.iter().zip(&s.assignment).map(|(a, x)| a * x).sum();
            ForwardSubstitution {
                determined: coeffs_in_row_space(&sys, &check.coeffs),
                solution: Some(s.assignment),
                lhs: Some(lhs),
                rhs: check.rhs.clone(),
            }
        }
    }
}

fn coeff_of(p: &Trunc, m: &Mono) -> Rational {
    p.poly.coeff(m)
}

fn monomials<'a>(polys: impl IntoIterator<Item = &'a Trunc>) -> Vec<Mono> {
    let mut set = std::collections::BTreeSet::new();
    for p in polys {
        for (m, c) in p.poly.terms() {
            if !c.is_zero() {
                set.insert(m.clone());
            }
        }
    }
    set.into_iter().collect()
}

fn trust_at_least(t: Trust, need: u32) -> bool {
    match t {
        Trust::Exact => true,
        Trust::Deg(d) => d >= need as i64,
    }
}

pub const EXP_UNKNOWNS: [&str; 6] = ["a_G1", "a_G2", "a_G3", "a_G4", "a_G5", "a_G6"];
pub const ORD_UNKNOWNS: [&str; 7] = ["K1", "K2", "K3", "K4", "K5", "K6", "K1^2"];

/// Match `sum_i a_Gi B_Gi(u, v) = C_T(u, v)` monomial by monomial through
/// coordinate degree 2, for all 16 ordered coordinate pairs, in the
/// exponential chart. `lam` must be trusted through degree 3.
pub fn assemble_exponential_system(
    lam: &PoissonTensor,
    images: &[Trunc; 4],
    table: &StarTable,
) -> Result<LinSystem, SolverError> {
    const DEG: u32 = 2;
    if !trust_at_least(lam.trust(), DEG + 1) {
        return Err(SolverError::TrustUnderflow {
            pair: "tensor".into(),
            got: lam.trust().to_string(),
            need: DEG + 1,
        });
    }
    let ops: Vec<DiffOp> = symmetric_basis()
        .iter()
        .map(|s| operator_from_schema(s, lam))
        .collect::<Result<_, _>>()?;
    let cochains = extract_cochains(table, EXPONENTIAL)?;
    let pairs: Vec<(usize, usize)> = (0..4).flat_map(|u| (0..4).map(move |v| (u, v))).collect();
    let per_pair: Vec<Result<Vec<(Vec<Rational>, Rational, Provenance)>, SolverError>> = pairs
        .par_iter()
        .map(|&(u, v)| {
            let name = |i: usize| ORDINARY.vars[i].to_string();
            let bs = apply_all(&ops, &images[u], &images[v], DEG)?;
            let ct = cochains.ct[&(u, v)].truncate(DEG as i64);
            for t in bs.iter().map(|b| b.trust).chain(std::iter::once(ct.trust)) {
                if !trust_at_least(t, DEG) {
                    return Err(SolverError::TrustUnderflow {
                        pair: format!("{},{}", name(u), name(v)),
                        got: t.to_string(),
                        need: DEG,
                    });
                }
            }
            let mut rows = Vec::new();
            for m in monomials(bs.iter().chain(std::iter::once(&ct))) {
                rows.push((
                    bs.iter().map(|b| coeff_of(b, &m)).collect(),
                    coeff_of(&ct, &m),
                    Provenance {
                        left: name(u),
                        right: name(v),
                        monomial: m.render(EXPONENTIAL),
                        t_order: 2,
                    },
                ));
            }
            Ok(rows)
        })
        .collect();
    let mut sys = LinSystem::new(&EXP_UNKNOWNS);
    for rows in per_pair {
        for (c, r, p) in rows? {
            sys.push(c, r, Some(p))?;
        }
    }
    Ok(sys)
}

fn apply_all(ops: &[DiffOp], f: &Trunc, g: &Trunc, deg: u32) -> Result<Vec<Trunc>, SolverError> {
    Ok(ops
        .iter()
        .map(|op| op.apply(&[f, g]).map(|b| b.truncate(deg as i64)))
        .collect::<Result<_, _>>()?)
}

/// The six symmetric operators `B_G1 .. B_G6` built on `lam`, applied to
/// `(f, g)` and truncated at coordinate degree `deg`.
pub fn symmetric_values(lam: &PoissonTensor, f: &Trunc, g: &Trunc, deg: u32) -> Result<Vec<Trunc>, SolverError> {
    let ops: Vec<DiffOp> = symmetric_basis()
        .iter()
        .map(|s| operator_from_schema(s, lam))
        .collect::<Result<_, _>>()?;
    apply_all(&ops, f, g, deg)
}

/// Defect of `T(f *_A g) = T f *_B T g` at `t^2` as a polynomial in the
/// unknowns `K1..K6, K1^2`: returns `(constant, per-unknown coefficients)`.
fn parametrized_defect(
    lam: &PoissonTensor,
    star_a: &dyn StarCochains,
    star_b: &dyn StarCochains,
    f: &Trunc,
    g: &Trunc,
) -> Result<(Trunc, Vec<Trunc>), SolverError> {
    let chart = lam.chart();
    let ops: Vec<DiffOp> = unary_basis()
        .iter()
        .map(|s| operator_from_schema(s, lam))
        .collect::<Result<_, _>>()?;
    let defect_at = |k: &[Rational; 6]| -> Result<Trunc, SolverError> {
        let t1 = ops[0].scale(&k[0]);
        let mut t2 = DiffOp::zero(chart, 1);
        for i in 1..6 {
            t2 = t2.add(&ops[i].scale(&k[i]));
        }
        let t = EquivalenceMap::new(vec![DiffOp::identity(chart), t1, t2])?;
        Ok(equivalence_defect(&t, star_a, star_b, 2, f, g)?)
    };
    let zero: [Rational; 6] = std::array::from_fn(|_| Rational::zero());
    let d0 = defect_at(&zero)?;
    let mut lin = Vec::new();
    // K1 enters linearly and through K1^2: use K1 = +1 and K1 = -1
    let mut kp = zero.clone();
    kp[0] = int(1);
    let mut km = zero.clone();
    km[0] = int(-1);
    let dp = defect_at(&kp)?;
    let dm = defect_at(&km)?;
    let half = Rational::new(1.into(), 2.into());
    lin.push(dp.sub(&dm).scale(&half));
    let quad = dp.add(&dm).scale(&half).sub(&d0);
    for i in 1..6 {
        let mut k = zero.clone();
        k[i] = int(1);
        lin.push(defect_at(&k)?.sub(&d0));
    }
    lin.push(quad);
    Ok((d0, lin))
}

/// Rows of the order-2 equivalence between `star_a` (graph product with
/// operators built on `lam`) and `star_b`, matched per coordinate pair and
/// monomial. Unknowns `K1..K6` and `K1^2`, the latter lifted to a fresh
/// unknown.
pub fn assemble_equivalence_system(
    lam: &PoissonTensor,
    star_a: &(dyn StarCochains + Sync),
    star_b: &(dyn StarCochains + Sync),
) -> Result<LinSystem, SolverError> {
    let chart: Chart = lam.chart();
    let pairs: Vec<(usize, usize)> = (0..4).flat_map(|u| (0..4).map(move |v| (u, v))).collect();
    let per_pair: Vec<Result<Vec<(Vec<Rational>, Rational, Provenance)>, SolverError>> = pairs
        .par_iter()
        .map(|&(u, v)| {
            let f = Trunc::exact(Poly::var(chart, u));
            let g = Trunc::exact(Poly::var(chart, v));
            let (d0, lin) = parametrized_defect(lam, star_a, star_b, &f, &g)?;
            let mut rows = Vec::new();
            for m in monomials(lin.iter().chain(std::iter::once(&d0))) {
                rows.push((
                    lin.iter().map(|l| coeff_of(l, &m)).collect(),
                    -coeff_of(&d0, &m),
                    Provenance {
                        left: chart.vars[u].into(),
                        right: chart.vars[v].into(),
                        monomial: m.render(chart),
                        t_order: 2,
                    },
                ));
            }
            Ok(rows)
        })
        .collect();
    let mut sys = LinSystem::new(&ORD_UNKNOWNS);
    sys.notes.push("K1^2 is treated as an independent unknown; infeasibility of the lifted system implies infeasibility of the original".into());
    for rows in per_pair {
        for (c, r, p) in rows? {
            sys.push(c, r, Some(p))?;
        }
    }
    Ok(sys)
}

/// Matrix-coordinate system: graph product with the given weights against
/// the quantum-group product.
pub fn assemble_ordinary_system(kstar: &BiStar, table: &StarTable) -> Result<LinSystem, SolverError> {
    assemble_equivalence_system(&crate::poisson::ordinary_tensor(), kstar, table)
}

/// Pairs of rows with identical left-hand sides and different right-hand
/// sides, normalized so the first nonzero coefficient is 1:
/// `(row i, row j, rhs_i - rhs_j)`.
pub fn contradictory_pairs(sys: &LinSystem) -> Vec<(usize, usize, Rational)> {
    let normalized: Vec<Option<(Vec<Rational>, Rational)>> = sys
        .rows()
        .iter()
        .map(|r| {
            let lead = r.coeffs.iter().find(|c| !c.is_zero())?.clone();
            Some((r.coeffs.iter().map(|c| c / &lead).collect(), &r.rhs / &lead))
        })
        .collect();
    let mut by_lhs: BTreeMap<Vec<Rational>, Vec<(usize, Rational)>> = BTreeMap::new();
    for (i, n) in normalized.into_iter().enumerate() {
        if let Some((c, r)) = n {
            by_lhs.entry(c).or_default().push((i, r));
        }
    }
    let mut out = Vec::new();
    for group in by_lhs.values() {
        for a in 0..group.len() {
            for b in (a + 1)..group.len() {
                if group[a].1 != group[b].1 {
                    out.push((group[a].0, group[b].0, &group[a].1 - &group[b].1));
                }
            }
        }
    }
    out
}

/// Normalized form `lhs . x = rhs` with leading coefficient 1.
pub fn normalize(coeffs: &[Rational], rhs: &Rational) -> Option<(Vec<Rational>, Rational)> {
    let lead = coeffs.iter().find(|c| !c.is_zero())?.clone();
    Some((coeffs.iter().map(|c| c / &lead).collect(), rhs / &lead))
}

/// Signed integer helper for tests and examples.
pub fn ints(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| int(x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::rat;
    use crate::reference;
    use proptest::prelude::*;

    fn sys(rows: &[(&[i64], Rational)]) -> LinSystem {
        let names: Vec<String> = (0..rows[0].0.len()).map(|i| format!("x{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        let mut s = LinSystem::new(&refs);
        for (c, r) in rows {
            s.push(ints(c), r.clone(), None).unwrap();
        }
        s
    }

    #[test]
    fn empty_system_is_full_space() {
        let s = LinSystem::new(&["x", "y"]);
        assert_eq!(
            solve_or_certificate(&s),
            Outcome::Solution(Solution {
                assignment: vec![rat(0, 1), rat(0, 1)],
                nullity: 2
            })
        );
    }

    #[test]
    fn trivial_row_has_nullity_one() {
        let mut s = LinSystem::new(&["x"]);
        s.push(vec![rat(0, 1)], rat(0, 1), None).unwrap();
        match solve_or_certificate(&s) {
            Outcome::Solution(sol) => assert_eq!(sol.nullity, 1),
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn contradictory_pair_certificate() {
        let s = sys(&[(&[0, 1], rat(1, 12)), (&[0, 1], rat(1, 12) - rat(1, 8))]);
        let Outcome::Infeasible(c) = solve_or_certificate(&s) else { panic!() };
        assert!(verify_certificate(&s, &c));
        assert_eq!(c.combined_rhs.abs(), rat(1, 8));
        assert_eq!(contradictory_pairs(&s), vec![(0, 1, rat(1, 8))]);
    }

    #[test]
    fn solution_satisfies_rows() {
        let s = sys(&[(&[2, 1, 0], rat(3, 1)), (&[1, -1, 1], rat(1, 2)), (&[3, 0, 1], rat(7, 2))]);
        let Outcome::Solution(sol) = solve_or_certificate(&s) else { panic!() };
        assert_eq!(sol.nullity, 1);
        for r in s.rows() {
            let v: Rational = r.coeffs.iter().zip(&sol.assignment).map(|(a, x)| a * x).sum();
            assert_eq!(v, r.rhs);
        }
    }

    #[test]
    fn duplicates_merge_provenance() {
        let mut s = LinSystem::new(&["x"]);
        let p = |m: &str| Provenance {
            left: "a".into(),
            right: "b".into(),
            monomial: m.into(),
            t_order: 2,
        };
        s.push(ints(&[1]), rat(1, 1), Some(p("a"))).unwrap();
        s.push(ints(&[1]), rat(1, 1), Some(p("b"))).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.rows()[0].provenance.len(), 2);
    }

    #[test]
    fn quoted_forward_substitution() {
        let rows = reference::exponential_rows();
        let fs = forward_substitute(&EXP_UNKNOWNS, &rows[..5], &rows[5]);
        assert!(fs.determined);
        assert_eq!(fs.lhs, Some(rat(7, 16)));
        assert_eq!(fs.rhs, rat(-9, 16));
        let sol = fs.solution.unwrap();
        assert_eq!((sol[2].clone(), sol[4].clone(), sol[5].clone()), (rat(-5, 32), rat(-3, 2), rat(11, 16)));
    }

    fn small_system() -> impl Strategy<Value = Vec<(Vec<i64>, i64)>> {
        proptest::collection::vec((proptest::collection::vec(-3i64..=3, 3), -3i64..=3), 1..7)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn outcome_is_sound_and_permutation_invariant(rows in small_system(), rot in 0usize..7) {
            let build = |rs: &[(Vec<i64>, i64)]| {
                let mut s = LinSystem::new(&["x", "y", "z"]);
                for (c, r) in rs {
                    s.push(ints(c), int(*r), None).unwrap();
                }
                s
            };
            let s = build(&rows);
            let mut rotated = rows.clone();
            let k = rot % rotated.len();
            rotated.rotate_left(k);
            let s2 = build(&rotated);
            let o1 = solve_or_certificate(&s);
            let o2 = solve_or_certificate(&s2);
            for (sy, o) in [(&s, &o1), (&s2, &o2)] {
                match o {
                    Outcome::Infeasible(c) => prop_assert!(verify_certificate(sy, c)),
                    Outcome::Solution(sol) => {
                        for r in sy.rows() {
                            let v: Rational = r.coeffs.iter().zip(&sol.assignment).map(|(a, x)| a * x).sum();
                            prop_assert_eq!(v, r.rhs.clone());
                        }
                    }
                }
            }
            prop_assert_eq!(matches!(o1, Outcome::Infeasible(_)), matches!(o2, Outcome::Infeasible(_)));
        }
    }
}
