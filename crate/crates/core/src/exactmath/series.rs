use super::{check_chart, Chart, MathError, Poly, Rational};
use std::fmt;

/// Coordinate degree through which a truncated quantity is known exactly.
///
/// `Deg(d)` with `d < 0` means nothing is trusted.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Trust {
    Exact,
    Deg(i64),
}

impl Trust {
    pub fn min(self, other: Trust) -> Trust {
        match (self, other) {
            (Trust::Exact, t) | (t, Trust::Exact) => t,
            (Trust::Deg(a), Trust::Deg(b)) => Trust::Deg(a.min(b)),
        }
    }

    pub fn shift(self, k: i64) -> Trust {
        match self {
            Trust::Exact => Trust::Exact,
            Trust::Deg(d) => Trust::Deg(d + k),
        }
    }

    /// Degree of the lowest possibly-unknown term, `None` when exact.
    fn tail(self) -> Option<i64> {
        match self {
            Trust::Exact => None,
            Trust::Deg(d) => Some(d + 1),
        }
    }

    /// Drop everything the bound does not vouch for.
    pub fn cap(self, p: &Poly) -> Poly {
        match self {
            Trust::Exact => p.clone(),
            Trust::Deg(d) if d < 0 => Poly::zero(p.chart()),
            Trust::Deg(d) => p.truncate(d as u32),
        }
    }

    pub fn as_bound(self) -> Option<u32> {
        match self {
            Trust::Exact => None,
            Trust::Deg(d) => Some(d.max(0) as u32),
        }
    }
}

impl fmt::Display for Trust {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Trust::Exact => f.write_str("exact"),
            Trust::Deg(d) => write!(f, "{d}"),
        }
    }
}

/// Lowest degree that may be nonzero, counting the untrusted tail.
fn effective_min_degree(polys: &[Poly], trust: Trust) -> Option<i64> {
    let known = polys.iter().filter_map(|p| p.min_degree()).min().map(i64::from);
    match (known, trust.tail()) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    }
}

/// Trust of a product. Errors from either factor's tail are multiplied by the
/// other factor's lowest possible degree.
fn product_trust(a: &[Poly], ta: Trust, b: &[Poly], tb: Trust) -> Trust {
    let ma = effective_min_degree(a, ta);
    let mb = effective_min_degree(b, tb);
    let mut t = Trust::Exact;
    if let (Trust::Deg(d), Some(m)) = (tb, ma) {
        t = t.min(Trust::Deg(d + m));
    }
    if let (Trust::Deg(d), Some(m)) = (ta, mb) {
        t = t.min(Trust::Deg(d + m));
    }
    t
}

/// A polynomial known exactly through a coordinate-degree bound.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Trunc {
    pub poly: Poly,
    pub trust: Trust,
}

impl Trunc {
    pub fn new(poly: Poly, trust: Trust) -> Self {
        Trunc {
            poly: trust.cap(&poly),
            trust,
        }
    }

    pub fn exact(poly: Poly) -> Self {
        Trunc {
            poly,
            trust: Trust::Exact,
        }
    }

    pub fn zero(chart: Chart) -> Self {
        Self::exact(Poly::zero(chart))
    }

    pub fn chart(&self) -> Chart {
        self.poly.chart()
    }

    pub fn add(&self, o: &Trunc) -> Trunc {
        let t = self.trust.min(o.trust);
        Trunc::new(&self.poly + &o.poly, t)
    }

    pub fn sub(&self, o: &Trunc) -> Trunc {
        let t = self.trust.min(o.trust);
        Trunc::new(&self.poly - &o.poly, t)
    }

    pub fn mul(&self, o: &Trunc) -> Trunc {
        let t = product_trust(
            std::slice::from_ref(&self.poly),
            self.trust,
            std::slice::from_ref(&o.poly),
            o.trust,
        );
        let p = match t.as_bound() {
            Some(_) if matches!(t, Trust::Deg(d) if d < 0) => Poly::zero(self.chart()),
            Some(d) => self.poly.mul_trunc(&o.poly, d),
            None => &self.poly * &o.poly,
        };
        Trunc { poly: p, trust: t }
    }

    pub fn scale(&self, k: &Rational) -> Trunc {
        Trunc {
            poly: self.poly.scale(k),
            trust: self.trust,
        }
    }

    pub fn deriv(&self, var: usize) -> Trunc {
        Trunc::new(self.poly.deriv(var), self.trust.shift(-1))
    }

    pub fn deriv_multi(&self, counts: &[u32]) -> Trunc {
        let order: u32 = counts.iter().sum();
        Trunc::new(self.poly.deriv_multi(counts), self.trust.shift(-(order as i64)))
    }

    /// Restrict to a smaller bound.
    pub fn truncate(&self, deg: i64) -> Trunc {
        Trunc::new(self.poly.clone(), self.trust.min(Trust::Deg(deg)))
    }
}

/// Series `sum_k t^k c_k` with polynomial coefficients and one shared
/// coordinate-degree bound. `t_order = coeffs.len() - 1`.
#[derive(Clone, PartialEq, Eq)]
pub struct TSeries {
    coeffs: Vec<Poly>,
    trust: Trust,
}

impl TSeries {
    pub fn new(coeffs: Vec<Poly>, trust: Trust) -> Self {
        assert!(!coeffs.is_empty(), "series needs a t^0 coefficient");
        let coeffs = coeffs.iter().map(|p| trust.cap(p)).collect();
        TSeries { coeffs, trust }
    }

    pub fn from_poly(p: Poly, t_order: usize, trust: Trust) -> Self {
        let chart = p.chart();
        let mut coeffs = vec![p];
        coeffs.resize(t_order + 1, Poly::zero(chart));
        Self::new(coeffs, trust)
    }

    pub fn zero(chart: Chart, t_order: usize) -> Self {
        Self::new(vec![Poly::zero(chart); t_order + 1], Trust::Exact)
    }

    pub fn chart(&self) -> Chart {
        self.coeffs[0].chart()
    }

    pub fn t_order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn trust(&self) -> Trust {
        self.trust
    }

    pub fn coeffs(&self) -> &[Poly] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> &Poly {
        &self.coeffs[k]
    }

    pub fn coeff_trunc(&self, k: usize) -> Trunc {
        Trunc {
            poly: self.coeffs[k].clone(),
            trust: self.trust,
        }
    }

    pub fn checked_add(&self, o: &TSeries) -> Result<TSeries, MathError> {
        check_chart(self.chart(), o.chart())?;
        let n = self.t_order().min(o.t_order());
        Ok(TSeries::new(
            (0..=n).map(|k| &self.coeffs[k] + &o.coeffs[k]).collect(),
            self.trust.min(o.trust),
        ))
    }

    pub fn checked_sub(&self, o: &TSeries) -> Result<TSeries, MathError> {
        self.checked_add(&o.scale(&Rational::from_integer((-1).into())))
    }

    pub fn checked_mul(&self, o: &TSeries) -> Result<TSeries, MathError> {
        check_chart(self.chart(), o.chart())?;
        let n = self.t_order().min(o.t_order());
        let t = product_trust(&self.coeffs, self.trust, &o.coeffs, o.trust);
        let chart = self.chart();
        let mut out = vec![Poly::zero(chart); n + 1];
        for i in 0..=n {
            for j in 0..=(n - i) {
                let p = match t {
                    Trust::Deg(d) if d < 0 => Poly::zero(chart),
                    Trust::Deg(d) => self.coeffs[i].mul_trunc(&o.coeffs[j], d as u32),
                    Trust::Exact => &self.coeffs[i] * &o.coeffs[j],
                };
                out[i + j] = &out[i + j] + p;
            }
        }
        Ok(TSeries::new(out, t))
    }

    pub fn add(&self, o: &TSeries) -> TSeries {
        self.checked_add(o).unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn sub(&self, o: &TSeries) -> TSeries {
        self.checked_sub(o).unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn mul(&self, o: &TSeries) -> TSeries {
        self.checked_mul(o).unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn scale(&self, k: &Rational) -> TSeries {
        TSeries {
            coeffs: self.coeffs.iter().map(|p| p.scale(k)).collect(),
            trust: self.trust,
        }
    }

    pub fn deriv(&self, var: usize) -> TSeries {
        TSeries::new(
            self.coeffs.iter().map(|p| p.deriv(var)).collect(),
            self.trust.shift(-1),
        )
    }

    /// Restrict the coordinate-degree bound.
    pub fn truncate_degree(&self, deg: i64) -> TSeries {
        TSeries::new(self.coeffs.clone(), self.trust.min(Trust::Deg(deg)))
    }

    /// Keep `t^0 .. t^order`.
    pub fn truncate_t(&self, order: usize) -> TSeries {
        let mut c = self.coeffs.clone();
        c.truncate(order + 1);
        TSeries::new(c, self.trust)
    }

    /// Canonical text per power of `t`.
    pub fn render(&self) -> Vec<String> {
        self.coeffs.iter().map(Poly::render).collect()
    }
}

impl fmt::Debug for TSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TSeries[trust {}]{:?}", self.trust, self.render())
    }
}

/// Substitute series for the variables of `target`.
///
/// `images[i]` is the image of variable `i`; every variable that actually
/// occurs must have one. The result's trust follows the product and sum rules.
pub fn series_substitute(target: &Poly, images: &[Option<TSeries>]) -> Result<TSeries, MathError> {
    let src = target.chart();
    let mut used = vec![0u32; src.nvars()];
    for (m, _) in target.terms() {
        for (i, &e) in m.0.iter().enumerate() {
            used[i] = used[i].max(e);
        }
    }
    let mut first: Option<&TSeries> = None;
    for (i, &u) in used.iter().enumerate() {
        if u > 0 {
            let img = images
                .get(i)
                .and_then(|x| x.as_ref())
                .ok_or_else(|| MathError::MissingImage(src.vars[i].to_string()))?;
            if let Some(f) = first {
                check_chart(f.chart(), img.chart())?;
                if f.t_order() != img.t_order() {
                    return Err(MathError::OrderMismatch(f.t_order(), img.t_order()));
                }
            } else {
                first = Some(img);
            }
        }
    }
    let proto = match first.or_else(|| images.iter().flatten().next()) {
        Some(p) => p,
        None => return Err(MathError::MissingImage("<any>".into())),
    };
    let chart = proto.chart();
    let order = proto.t_order();
    let mut powers: Vec<Vec<TSeries>> = Vec::new();
    for (i, &u) in used.iter().enumerate() {
        let mut v = vec![TSeries::from_poly(Poly::one(chart), order, Trust::Exact)];
        for k in 1..=u {
            let next = v[(k - 1) as usize].mul(images[i].as_ref().unwrap());
            v.push(next);
        }
        powers.push(v);
    }
    let mut out = TSeries::zero(chart, order);
    for (m, c) in target.terms() {
        let mut term = TSeries::from_poly(Poly::constant(chart, c.clone()), order, Trust::Exact);
        for (i, &e) in m.0.iter().enumerate() {
            if e > 0 {
                term = term.mul(&powers[i][e as usize]);
            }
        }
        out = out.add(&term);
    }
    Ok(out)
}
