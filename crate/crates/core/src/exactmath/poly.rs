use super::{check_chart, fmt_rat, parse_rat, Chart, MathError, Rational};
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Exponent vector, one entry per chart variable.
///
/// Ordered graded-lexicographically: lower total degree first, then larger
/// exponents of earlier variables first (so `alpha^2` precedes `beta*gamma`).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Mono(pub Vec<u32>);

impl Mono {
    pub fn one(nvars: usize) -> Self {
        Mono(vec![0; nvars])
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Mono(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        Mono(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self / other` when `other` divides `self`.
    pub fn div(&self, other: &Mono) -> Option<Mono> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(Mono)
    }

    pub fn render(&self, chart: Chart) -> String {
        let mut parts = Vec::new();
        for (i, &e) in self.0.iter().enumerate() {
            match e {
                0 => {}
                1 => parts.push(chart.vars[i].to_string()),
                _ => parts.push(format!("{}^{}", chart.vars[i], e)),
            }
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse polynomial with exact rational coefficients over a [`Chart`].
///
/// Zero coefficients are never stored, so structural equality is equality of
/// polynomials.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly {
    chart: Chart,
    terms: BTreeMap<Mono, Rational>,
}

impl Poly {
    pub fn zero(chart: Chart) -> Self {
        Poly {
            chart,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(chart: Chart) -> Self {
        Self::constant(chart, Rational::one())
    }

    pub fn constant(chart: Chart, c: Rational) -> Self {
        Self::monomial(chart, Mono::one(chart.nvars()), c)
    }

    pub fn monomial(chart: Chart, m: Mono, c: Rational) -> Self {
        assert_eq!(m.0.len(), chart.nvars(), "exponent vector length");
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { chart, terms }
    }

    /// The coordinate function of variable number `i`.
    pub fn var(chart: Chart, i: usize) -> Self {
        Self::monomial(chart, Mono::var(chart.nvars(), i), Rational::one())
    }

    pub fn named(chart: Chart, name: &str) -> Result<Self, MathError> {
        Ok(Self::var(chart, chart.index_of(name)?))
    }

    /// All coordinate functions of the chart, in variable order.
    pub fn vars(chart: Chart) -> Vec<Poly> {
        (0..chart.nvars()).map(|i| Self::var(chart, i)).collect()
    }

    pub fn from_terms(chart: Chart, terms: impl IntoIterator<Item = (Mono, Rational)>) -> Self {
        let mut p = Poly::zero(chart);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &Rational)> {
        self.terms.iter()
    }

    pub fn nterms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, m: &Mono) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.coeff(&Mono::one(self.chart.nvars()))
    }

    /// Maximum exponent sum; `None` stands for the degree of the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Mono::degree).max()
    }

    /// Minimum exponent sum over terms; `None` for zero.
    pub fn min_degree(&self) -> Option<u32> {
        self.terms.keys().map(Mono::degree).min()
    }

    pub fn add_term(&mut self, m: Mono, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&m);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn checked_add(&self, other: &Poly) -> Result<Poly, MathError> {
        check_chart(self.chart, other.chart)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &Poly) -> Result<Poly, MathError> {
        self.checked_add(&other.neg_ref())
    }

    pub fn checked_mul(&self, other: &Poly) -> Result<Poly, MathError> {
        check_chart(self.chart, other.chart)?;
        let mut out = Poly::zero(self.chart);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        Ok(out)
    }

    /// Product truncated to total degree `deg`, skipping higher terms early.
    pub fn mul_trunc(&self, other: &Poly, deg: u32) -> Poly {
        check_chart(self.chart, other.chart).expect("chart mismatch");
        let mut out = Poly::zero(self.chart);
        for (m1, c1) in &self.terms {
            let d1 = m1.degree();
            if d1 > deg {
                break;
            }
            for (m2, c2) in &other.terms {
                if d1 + m2.degree() > deg {
                    break;
                }
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    pub fn neg_ref(&self) -> Poly {
        Poly {
            chart: self.chart,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, k: &Rational) -> Poly {
        if k.is_zero() {
            return Poly::zero(self.chart);
        }
        Poly {
            chart: self.chart,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut out = Poly::one(self.chart);
        for _ in 0..e {
            out = &out * self;
        }
        out
    }

    /// Partial derivative with respect to variable number `var`.
    pub fn deriv(&self, var: usize) -> Poly {
        let mut out = Poly::zero(self.chart);
        for (m, c) in &self.terms {
            let e = m.0[var];
            if e > 0 {
                let mut m2 = m.clone();
                m2.0[var] -= 1;
                out.add_term(m2, c * Rational::from_integer(e.into()));
            }
        }
        out
    }

    /// Apply `prod_i d_i^{counts[i]}`.
    pub fn deriv_multi(&self, counts: &[u32]) -> Poly {
        let mut out = self.clone();
        for (v, &k) in counts.iter().enumerate() {
            for _ in 0..k {
                if out.is_zero() {
                    return out;
                }
                out = out.deriv(v);
            }
        }
        out
    }

    /// Drop every term of total degree above `deg`.
    pub fn truncate(&self, deg: u32) -> Poly {
        Poly {
            chart: self.chart,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() <= deg)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Homogeneous component of degree `deg`.
    pub fn homogeneous(&self, deg: u32) -> Poly {
        Poly {
            chart: self.chart,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == deg)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Reinterpret the same exponent vectors over another chart with as many variables.
    pub fn rechart(&self, chart: Chart) -> Poly {
        assert_eq!(chart.nvars(), self.chart.nvars());
        Poly {
            chart,
            terms: self.terms.clone(),
        }
    }

    /// Evaluate at a rational point.
    pub fn eval(&self, point: &[Rational]) -> Rational {
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(&m.0) {
                for _ in 0..e {
                    t *= x;
                }
            }
            acc += t;
        }
        acc
    }

    /// Evaluate in binary64; used only for numeric cross-checks.
    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        use num_traits::ToPrimitive;
        self.terms
            .iter()
            .map(|(m, c)| {
                let mut t = c.to_f64().unwrap_or(f64::NAN);
                for (x, &e) in point.iter().zip(&m.0) {
                    t *= x.powi(e as i32);
                }
                t
            })
            .sum()
    }

    /// Canonical text form, e.g. `-5/3*alpha^2 - 10/3*beta*gamma`.
    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if k == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let is_const = m.degree() == 0;
            if is_const {
                out.push_str(&fmt_rat(&a));
            } else if a.is_one() {
                out.push_str(&m.render(self.chart));
            } else {
                out.push_str(&fmt_rat(&a));
                out.push('*');
                out.push_str(&m.render(self.chart));
            }
        }
        out
    }

    /// Parse the canonical text form. Coefficients must lead their term,
    /// as in `-5/3*alpha^2`.
    pub fn parse(chart: Chart, s: &str) -> Result<Poly, MathError> {
        let mut p = Poly::zero(chart);
        let cleaned: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if cleaned.is_empty() {
            return Err(MathError::Parse("empty polynomial".into()));
        }
        let mut chunks: Vec<(bool, String)> = Vec::new();
        let mut cur = String::new();
        let mut neg = false;
        for (i, ch) in cleaned.chars().enumerate() {
            if (ch == '+' || ch == '-') && !(i > 0 && cur.ends_with('^')) {
                if !cur.is_empty() {
                    chunks.push((neg, std::mem::take(&mut cur)));
                }
                neg = ch == '-';
            } else {
                cur.push(ch);
            }
        }
        if !cur.is_empty() {
            chunks.push((neg, cur));
        }
        for (neg, chunk) in chunks {
            let mut coef = Rational::one();
            let mut mono = Mono::one(chart.nvars());
            for factor in chunk.split('*') {
                if factor.is_empty() {
                    continue;
                }
                if factor.chars().next().is_some_and(|c| c.is_ascii_digit()) {
                    coef *= parse_rat(factor)?;
                } else {
                    let (name, e) = match factor.split_once('^') {
                        Some((n, e)) => (
                            n,
                            e.parse::<u32>()
                                .map_err(|_| MathError::Parse(format!("bad exponent in {factor}")))?,
                        ),
                        None => (factor, 1),
                    };
                    mono.0[chart.index_of(name)?] += e;
                }
            }
            if neg {
                coef = -coef;
            }
            p.add_term(mono, coef);
        }
        Ok(p)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly[{}]({})", self.chart.name, self.render())
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $checked:ident) => {
        impl $tr<&Poly> for &Poly {
            type Output = Poly;
            fn $m(self, rhs: &Poly) -> Poly {
                self.$checked(rhs).unwrap_or_else(|e| panic!("{e}"))
            }
        }
        impl $tr<Poly> for Poly {
            type Output = Poly;
            fn $m(self, rhs: Poly) -> Poly {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Poly> for Poly {
            type Output = Poly;
            fn $m(self, rhs: &Poly) -> Poly {
                (&self).$m(rhs)
            }
        }
        impl $tr<Poly> for &Poly {
            type Output = Poly;
            fn $m(self, rhs: Poly) -> Poly {
                self.$m(&rhs)
            }
        }
    };
}

binop!(Add, add, checked_add);
binop!(Sub, sub, checked_sub);
binop!(Mul, mul, checked_mul);

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.neg_ref()
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.neg_ref()
    }
}

/// Substitute `images[i]` (polynomials over `target`) for variable `i` of `p`,
/// keeping only terms of total degree `<= deg`.
///
/// Images must have no constant term for the truncation to be exact.
pub fn compose(p: &Poly, images: &[Poly], target: Chart, deg: u32) -> Poly {
    assert_eq!(images.len(), p.chart().nvars());
    let maxe: Vec<u32> = (0..images.len())
        .map(|i| p.terms().map(|(m, _)| m.0[i]).max().unwrap_or(0))
        .collect();
    let mut powers: Vec<Vec<Poly>> = Vec::with_capacity(images.len());
    for (i, img) in images.iter().enumerate() {
        let mut v = vec![Poly::one(target)];
        for k in 1..=maxe[i] {
            let next = v[(k - 1) as usize].mul_trunc(img, deg);
            v.push(next);
        }
        powers.push(v);
    }
    let mut out = Poly::zero(target);
    for (m, c) in p.terms() {
        let mut t = Poly::constant(target, c.clone());
        for (i, &e) in m.0.iter().enumerate() {
            if e > 0 {
                t = t.mul_trunc(&powers[i][e as usize], deg);
            }
        }
        out = out + t;
    }
    out
}

/// Formal inverse of a map tangent to the identity.
///
/// `map[k]` is a polynomial over the source chart whose linear part is the
/// `k`-th source variable. Returns `g` over `target` with
/// `map(g(y)) = y` through total degree `deg`, built one degree at a time.
pub fn revert(map: &[Poly], target: Chart, deg: u32) -> Result<Vec<Poly>, MathError> {
    let n = map.len();
    let source = map[0].chart();
    for (k, f) in map.iter().enumerate() {
        let lin = f.homogeneous(1);
        if !f.constant_term().is_zero() || lin != Poly::var(source, k) {
            return Err(MathError::NotTangentToIdentity(k));
        }
    }
    let nonlinear: Vec<Poly> = map
        .iter()
        .enumerate()
        .map(|(k, f)| f - Poly::var(source, k))
        .collect();
    let ys = Poly::vars(target);
    let mut g = ys.clone();
    for d in 2..=deg {
        g = (0..n)
            .map(|k| &ys[k] - compose(&nonlinear[k], &g, target, d))
            .collect();
    }
    Ok(g)
}
