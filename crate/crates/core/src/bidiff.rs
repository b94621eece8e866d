//! Multidifferential operators compiled from graphs against a Poisson tensor,
//! and the defect of a candidate equivalence between two star products.

use crate::exactmath::{MathError, Mono, Poly, Rational, Trunc, Trust};
use crate::exactmath::Chart;
use crate::graphs::{KGraph, Schema, Vertex};
use crate::poisson::PoissonTensor;
use num_traits::{One, Zero};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BidiffError {
    #[error(transparent)]
    Math(#[from] MathError),
    #[error("operator takes {expected} arguments, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("coordinate change has no identity term")]
    MissingIdentity,
    #[error("cochain of order {0} is not available")]
    MissingOrder(usize),
    #[error("argument outside the cochain's domain: {0}")]
    Domain(String),
}

/// Derivative counts per chart variable.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(nvars: usize) -> Self {
        MultiIndex(vec![0; nvars])
    }

    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    fn bump(&mut self, var: usize) {
        self.0[var] += 1;
    }

    /// `d_alpha^2 d_beta` style text; `1` for the empty index.
    pub fn render(&self, chart: Chart) -> String {
        let parts: Vec<String> = self
            .0
            .iter()
            .enumerate()
            .filter(|(_, &k)| k > 0)
            .map(|(i, &k)| if k == 1 { format!("d_{}", chart.vars[i]) } else { format!("d_{}^{k}", chart.vars[i]) })
            .collect();
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join(" ")
        }
    }
}

/// `sum coeff * d^{I_1} f_1 * ... * d^{I_k} f_k`, stored expanded.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DiffOp {
    chart: Chart,
    arity: usize,
    terms: BTreeMap<Vec<MultiIndex>, Trunc>,
}

impl DiffOp {
    pub fn zero(chart: Chart, arity: usize) -> Self {
        DiffOp {
            chart,
            arity,
            terms: BTreeMap::new(),
        }
    }

    /// The identity as a unary operator.
    pub fn identity(chart: Chart) -> Self {
        let mut op = Self::zero(chart, 1);
        op.add_term(vec![MultiIndex::zero(chart.nvars())], Trunc::exact(Poly::one(chart)));
        op
    }

    /// Pointwise product of two arguments.
    pub fn pointwise(chart: Chart) -> Self {
        let mut op = Self::zero(chart, 2);
        let z = MultiIndex::zero(chart.nvars());
        op.add_term(vec![z.clone(), z], Trunc::exact(Poly::one(chart)));
        op
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<MultiIndex>, &Trunc)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, idx: Vec<MultiIndex>, coeff: Trunc) {
        assert_eq!(idx.len(), self.arity);
        match self.terms.get_mut(&idx) {
            Some(c) => *c = c.add(&coeff),
            None => {
                self.terms.insert(idx, coeff);
            }
        }
    }

    /// Lowest trust over all coefficients.
    pub fn trust(&self) -> Trust {
        self.terms.values().fold(Trust::Exact, |t, c| t.min(c.trust))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|c| c.poly.is_zero())
    }

    pub fn add(&self, o: &DiffOp) -> DiffOp {
        assert_eq!((self.chart, self.arity), (o.chart, o.arity), "operator shape mismatch");
        let mut out = self.clone();
        for (k, c) in &o.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, k: &Rational) -> DiffOp {
        DiffOp {
            chart: self.chart,
            arity: self.arity,
            terms: self.terms.iter().map(|(i, c)| (i.clone(), c.scale(k))).collect(),
        }
    }

    pub fn sub(&self, o: &DiffOp) -> DiffOp {
        self.add(&o.scale(&-Rational::one()))
    }

    /// Exchange the two arguments of a bidifferential operator.
    pub fn swap_args(&self) -> DiffOp {
        assert_eq!(self.arity, 2);
        DiffOp {
            chart: self.chart,
            arity: 2,
            terms: self.terms.iter().map(|(i, c)| (vec![i[1].clone(), i[0].clone()], c.clone())).collect(),
        }
    }

    pub fn symmetric_part(&self) -> DiffOp {
        self.add(&self.swap_args()).scale(&Rational::new(1.into(), 2.into()))
    }

    pub fn antisymmetric_part(&self) -> DiffOp {
        self.sub(&self.swap_args()).scale(&Rational::new(1.into(), 2.into()))
    }

    /// Every nonzero term differentiates every argument.
    pub fn vanishes_on_constants(&self) -> bool {
        self.terms
            .iter()
            .filter(|(_, c)| !c.poly.is_zero())
            .all(|(i, _)| i.iter().all(|m| m.order() > 0))
    }

    pub fn apply(&self, args: &[&Trunc]) -> Result<Trunc, BidiffError> {
        if args.len() != self.arity {
            return Err(BidiffError::Arity {
                expected: self.arity,
                got: args.len(),
            });
        }
        for a in args {
            crate::exactmath::check_chart(self.chart, a.chart())?;
        }
        let mut cache: Vec<BTreeMap<&MultiIndex, Trunc>> = vec![BTreeMap::new(); self.arity];
        let mut out = Trunc::zero(self.chart);
        for (idx, c) in &self.terms {
            let mut term = c.clone();
            for (s, mi) in idx.iter().enumerate() {
                let d = cache[s].entry(mi).or_insert_with(|| args[s].deriv_multi(&mi.0));
                term = term.mul(d);
            }
            out = out.add(&term);
        }
        Ok(out)
    }

    /// Apply to exact polynomials.
    pub fn apply_poly(&self, args: &[&Poly]) -> Result<Trunc, BidiffError> {
        let t: Vec<Trunc> = args.iter().map(|p| Trunc::exact((*p).clone())).collect();
        let refs: Vec<&Trunc> = t.iter().collect();
        self.apply(&refs)
    }

    /// JSON list of `{coeff, multiindices}` in canonical order, zero terms omitted.
    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .filter(|(_, c)| !c.poly.is_zero())
            .map(|(i, c)| {
                json!({
                    "coeff": c.poly.render(),
                    "trusted_degree": c.trust.to_string(),
                    "multiindices": i.iter().map(|m| m.0.clone()).collect::<Vec<_>>(),
                })
            })
            .collect();
        json!({ "chart": self.chart.name, "arity": self.arity, "terms": terms })
    }
}

/// Compile one graph: the aerial vertex `p_k` contributes
/// `d^{(edges landing on p_k)} Lambda^{i_k j_k}`, the terrestrial vertex `q_s`
/// receives the derivatives of the edges landing on it.
pub fn operator_from_graph(g: &KGraph, lam: &PoissonTensor) -> Result<DiffOp, BidiffError> {
    let chart = lam.chart();
    let dim = chart.nvars();
    let n = g.n_aerial;
    let mut op = DiffOp::zero(chart, g.m_terrestrial);
    let mut derivs: BTreeMap<(usize, usize, Vec<u32>), Trunc> = BTreeMap::new();
    let total = dim.pow(2 * n as u32);
    for code in 0..total {
        // idx[2k] = i_k, idx[2k+1] = j_k
        let mut idx = vec![0usize; 2 * n];
        let mut c = code;
        for slot in idx.iter_mut() {
            *slot = c % dim;
            c /= dim;
        }
        if (0..n).any(|k| idx[2 * k] == idx[2 * k + 1]) {
            continue;
        }
        let mut aerial = vec![MultiIndex::zero(dim); n];
        let mut terrestrial = vec![MultiIndex::zero(dim); g.m_terrestrial];
        for (k, &(first, second)) in g.edges.iter().enumerate() {
            for (target, var) in [(first, idx[2 * k]), (second, idx[2 * k + 1])] {
                match target {
                    Vertex::Aerial(l) => aerial[l].bump(var),
                    Vertex::Terrestrial(s) => terrestrial[s].bump(var),
                }
            }
        }
        let mut coeff = Trunc::exact(Poly::one(chart));
        for k in 0..n {
            let key = (idx[2 * k], idx[2 * k + 1], aerial[k].0.clone());
            let d = derivs
                .entry(key)
                .or_insert_with(|| lam.entry_trunc(idx[2 * k], idx[2 * k + 1]).deriv_multi(&aerial[k].0));
            coeff = coeff.mul(d);
        }
        if coeff.poly.is_zero() && coeff.trust == Trust::Exact {
            continue;
        }
        op.add_term(terrestrial, coeff);
    }
    Ok(op)
}

/// Sum of the operators of a schema's graphs.
pub fn operator_from_schema(s: &Schema, lam: &PoissonTensor) -> Result<DiffOp, BidiffError> {
    let arity = s.graphs.first().map(|g| g.m_terrestrial).unwrap_or(2);
    let mut op = DiffOp::zero(lam.chart(), arity);
    for g in &s.graphs {
        op = op.add(&operator_from_graph(g, lam)?);
    }
    Ok(op)
}

/// `C_1 = (1/2) Lambda^{ij} d_i (x) d_j`.
pub fn first_order_cochain(lam: &PoissonTensor) -> DiffOp {
    let chart = lam.chart();
    let dim = chart.nvars();
    let mut op = DiffOp::zero(chart, 2);
    for i in 0..dim {
        for j in 0..dim {
            if i == j {
                continue;
            }
            let mut l = MultiIndex::zero(dim);
            l.bump(i);
            let mut r = MultiIndex::zero(dim);
            r.bump(j);
            op.add_term(vec![l, r], lam.entry_trunc(i, j).scale(&Rational::new(1.into(), 2.into())));
        }
    }
    op
}

/// Source of the cochains `C_0, C_1, ...` of a star product.
pub trait StarCochains {
    fn chart(&self) -> Chart;
    fn max_order(&self) -> usize;
    /// `C_k(f, g)`; `C_0` is the pointwise product.
    fn cochain(&self, k: usize, f: &Trunc, g: &Trunc) -> Result<Trunc, BidiffError>;
}

/// Star product given by explicit bidifferential cochains `C_1, C_2, ...`.
#[derive(Clone, Debug)]
pub struct BiStar {
    pub chart: Chart,
    /// `cochains[k-1] = C_k`.
    pub cochains: Vec<DiffOp>,
}

impl StarCochains for BiStar {
    fn chart(&self) -> Chart {
        self.chart
    }

    fn max_order(&self) -> usize {
        self.cochains.len()
    }

    fn cochain(&self, k: usize, f: &Trunc, g: &Trunc) -> Result<Trunc, BidiffError> {
        if k == 0 {
            return Ok(f.mul(g));
        }
        self.cochains.get(k - 1).ok_or(BidiffError::MissingOrder(k))?.apply(&[f, g])
    }
}

/// `T = Id + t T_1 + t^2 T_2 + ...` with unary operators.
#[derive(Clone, Debug)]
pub struct EquivalenceMap {
    ops: Vec<DiffOp>,
}

impl EquivalenceMap {
    /// `ops[0]` must be the identity; the others must kill constants.
    pub fn new(ops: Vec<DiffOp>) -> Result<Self, BidiffError> {
        let first = ops.first().ok_or(BidiffError::MissingIdentity)?;
        if *first != DiffOp::identity(first.chart()) {
            return Err(BidiffError::MissingIdentity);
        }
        for op in &ops[1..] {
            if op.arity() != 1 {
                return Err(BidiffError::Arity {
                    expected: 1,
                    got: op.arity(),
                });
            }
            if !op.vanishes_on_constants() {
                return Err(BidiffError::Domain("higher terms must vanish on constants".into()));
            }
        }
        Ok(EquivalenceMap { ops })
    }

    pub fn identity(chart: Chart, order: usize) -> Self {
        let mut ops = vec![DiffOp::identity(chart)];
        ops.extend((0..order).map(|_| DiffOp::zero(chart, 1)));
        EquivalenceMap { ops }
    }

    pub fn order(&self) -> usize {
        self.ops.len() - 1
    }

    pub fn apply(&self, p: usize, f: &Trunc) -> Result<Trunc, BidiffError> {
        match self.ops.get(p) {
            Some(op) => op.apply(&[f]),
            None => Ok(Trunc::zero(f.chart())),
        }
    }
}

/// Order-`k` defect of `T(f *_A g) = T f *_B T g`:
/// `sum_{p+q=k} T_p(C^A_q(f,g)) - sum_{p+q+r=k} C^B_p(T_q f, T_r g)`.
pub fn equivalence_defect(
    t: &EquivalenceMap,
    star_a: &dyn StarCochains,
    star_b: &dyn StarCochains,
    k: usize,
    f: &Trunc,
    g: &Trunc,
) -> Result<Trunc, BidiffError> {
    let mut out = Trunc::zero(f.chart());
    for q in 0..=k {
        let c = star_a.cochain(q, f, g)?;
        out = out.add(&t.apply(k - q, &c)?);
    }
    let tf: Vec<Trunc> = (0..=k).map(|q| t.apply(q, f)).collect::<Result<_, _>>()?;
    let tg: Vec<Trunc> = (0..=k).map(|r| t.apply(r, g)).collect::<Result<_, _>>()?;
    for p in 0..=k {
        for q in 0..=(k - p) {
            let r = k - p - q;
            if tf[q].poly.is_zero() && tf[q].trust == Trust::Exact || tg[r].poly.is_zero() && tg[r].trust == Trust::Exact {
                continue;
            }
            out = out.sub(&star_b.cochain(p, &tf[q], &tg[r])?);
        }
    }
    Ok(out)
}

/// Coefficient of every monomial of a truncated polynomial, in canonical order.
pub fn monomial_coefficients(p: &Trunc) -> Vec<(Mono, Rational)> {
    p.poly.terms().filter(|(_, c)| !c.is_zero()).map(|(m, c)| (m.clone(), c.clone())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::{int, ORDINARY};
    use crate::graphs::{symmetric_basis, unary_basis, KGraph};
    use crate::poisson::ordinary_tensor;
    use proptest::prelude::*;

    fn v(i: usize) -> Poly {
        Poly::var(ORDINARY, i)
    }

    #[test]
    fn wedge_is_the_bracket() {
        let lam = ordinary_tensor();
        let wedge = operator_from_graph(&KGraph::parse("n=1 m=2; p1->(q1,q2)").unwrap(), &lam).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let got = wedge.apply_poly(&[&v(i), &v(j)]).unwrap().poly;
                assert_eq!(&got, lam.entry(i, j));
            }
        }
    }

    #[test]
    fn zero_tensor_gives_zero_operator() {
        let z = PoissonTensor::zero(ORDINARY);
        for s in symmetric_basis() {
            assert!(operator_from_schema(&s, &z).unwrap().is_zero());
        }
    }

    #[test]
    fn symmetric_schemata_are_symmetric() {
        let lam = ordinary_tensor();
        for s in symmetric_basis() {
            let op = operator_from_schema(&s, &lam).unwrap();
            assert_eq!(op.swap_args().terms, op.terms, "{}", s.label);
            assert!(op.vanishes_on_constants());
        }
    }

    #[test]
    fn unary_schemata_kill_constants() {
        let lam = ordinary_tensor();
        let one = Poly::one(ORDINARY);
        for s in unary_basis() {
            let op = operator_from_schema(&s, &lam).unwrap();
            assert!(op.apply_poly(&[&one]).unwrap().poly.is_zero());
        }
    }

    #[test]
    fn first_unary_term_by_hand() {
        // sum_j d_j Lambda^{aj} = d_b(ab) + d_c(ac) + d_d(2bc) = 2a
        let lam = ordinary_tensor();
        let k1 = operator_from_schema(&unary_basis()[0], &lam).unwrap();
        assert_eq!(k1.apply_poly(&[&v(0)]).unwrap().poly, v(0).scale(&int(2)));
        assert_eq!(k1.apply_poly(&[&v(1)]).unwrap().poly, Poly::zero(ORDINARY));
    }

    #[test]
    fn identity_equivalence_has_no_defect() {
        let lam = ordinary_tensor();
        let star = BiStar {
            chart: ORDINARY,
            cochains: vec![first_order_cochain(&lam), operator_from_schema(&symmetric_basis()[3], &lam).unwrap()],
        };
        let t = EquivalenceMap::identity(ORDINARY, 2);
        for k in 0..=2 {
            let d = equivalence_defect(&t, &star, &star, k, &Trunc::exact(v(0) * v(1)), &Trunc::exact(v(3))).unwrap();
            assert!(d.poly.is_zero());
        }
    }

    #[test]
    fn order_one_defect_is_a_coboundary() {
        let lam = ordinary_tensor();
        let t1 = operator_from_schema(&unary_basis()[0], &lam).unwrap();
        let t = EquivalenceMap::new(vec![DiffOp::identity(ORDINARY), t1.clone()]).unwrap();
        let star = BiStar {
            chart: ORDINARY,
            cochains: vec![first_order_cochain(&lam)],
        };
        let f = Trunc::exact(v(0) * v(0) + v(2));
        let g = Trunc::exact(v(1) * v(3));
        let d = equivalence_defect(&t, &star, &star, 1, &f, &g).unwrap();
        let expect = t1.apply(&[&f.mul(&g)]).unwrap().sub(&f.mul(&t1.apply(&[&g]).unwrap())).sub(&g.mul(&t1.apply(&[&f]).unwrap()));
        assert_eq!(d, expect);
    }

    #[test]
    fn missing_identity_rejected() {
        assert_eq!(EquivalenceMap::new(vec![DiffOp::zero(ORDINARY, 1)]).unwrap_err(), BidiffError::MissingIdentity);
    }

    fn small_poly() -> impl Strategy<Value = Poly> {
        proptest::collection::vec((-3i64..=3, 0u32..=2, 0u32..=2, 0u32..=1, 0u32..=1), 1..5).prop_map(|ts| {
            let mut p = Poly::zero(ORDINARY);
            for (c, e0, e1, e2, e3) in ts {
                p.add_term(Mono(vec![e0, e1, e2, e3]), int(c));
            }
            p
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn apply_is_bilinear(f in small_poly(), g in small_poly(), h in small_poly(), k in -4i64..=4) {
            let lam = ordinary_tensor();
            let op = operator_from_schema(&symmetric_basis()[4], &lam).unwrap();
            let lhs = op.apply_poly(&[&(f.scale(&int(k)) + h.clone()), &g]).unwrap().poly;
            let rhs = op.apply_poly(&[&f, &g]).unwrap().poly.scale(&int(k)) + op.apply_poly(&[&h, &g]).unwrap().poly;
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn parts_recombine(i in 0usize..6) {
            let lam = ordinary_tensor();
            let op = operator_from_graph(&crate::graphs::enumerate_graphs(2, 2, true).unwrap()[i].representative, &lam).unwrap();
            let back = op.symmetric_part().add(&op.antisymmetric_part());
            let f = v(0) * v(3);
            let g = v(1) * v(2) + v(0);
            prop_assert_eq!(back.apply_poly(&[&f, &g]).unwrap().poly, op.apply_poly(&[&f, &g]).unwrap().poly);
        }
    }

    #[test]
    fn half_scaled_bracket() {
        let lam = ordinary_tensor();
        let c1 = first_order_cochain(&lam);
        let got = c1.apply_poly(&[&v(0), &v(3)]).unwrap().poly;
        assert_eq!(got, v(1) * v(2));
    }
}
