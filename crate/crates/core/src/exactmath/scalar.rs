use super::{fmt_rat, int, rat, Chart, MathError, Poly, Rational, TSeries, Trust};
use num_traits::{One, Zero};
use std::fmt;

/// Truncated power series in `t` with rational coefficients.
///
/// Truncation order is propagated: binary ops use the smaller order.
#[derive(Clone, PartialEq, Eq)]
pub struct RSeries(pub Vec<Rational>);

impl RSeries {
    pub fn order(&self) -> usize {
        self.0.len() - 1
    }

    pub fn zero(order: usize) -> Self {
        RSeries(vec![Rational::zero(); order + 1])
    }

    pub fn one(order: usize) -> Self {
        Self::constant(Rational::one(), order)
    }

    pub fn constant(c: Rational, order: usize) -> Self {
        let mut v = vec![Rational::zero(); order + 1];
        v[0] = c;
        RSeries(v)
    }

    /// The series `t`.
    pub fn t(order: usize) -> Self {
        let mut v = vec![Rational::zero(); order + 1];
        if order >= 1 {
            v[1] = Rational::one();
        }
        RSeries(v)
    }

    pub fn coeff(&self, k: usize) -> Rational {
        self.0.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn add(&self, o: &RSeries) -> RSeries {
        let n = self.order().min(o.order());
        RSeries((0..=n).map(|k| &self.0[k] + &o.0[k]).collect())
    }

    pub fn sub(&self, o: &RSeries) -> RSeries {
        let n = self.order().min(o.order());
        RSeries((0..=n).map(|k| &self.0[k] - &o.0[k]).collect())
    }

    pub fn scale(&self, k: &Rational) -> RSeries {
        RSeries(self.0.iter().map(|c| c * k).collect())
    }

    pub fn mul(&self, o: &RSeries) -> RSeries {
        let n = self.order().min(o.order());
        let mut v = vec![Rational::zero(); n + 1];
        for i in 0..=n {
            if self.0[i].is_zero() {
                continue;
            }
            for j in 0..=(n - i) {
                v[i + j] += &self.0[i] * &o.0[j];
            }
        }
        RSeries(v)
    }

    /// `t -> -t`.
    pub fn reflect(&self) -> RSeries {
        RSeries(
            self.0
                .iter()
                .enumerate()
                .map(|(k, c)| if k % 2 == 1 { -c } else { c.clone() })
                .collect(),
        )
    }

    /// `exp(k t)`.
    pub fn exp_kt(k: &Rational, order: usize) -> RSeries {
        let mut v = Vec::with_capacity(order + 1);
        let mut term = Rational::one();
        for n in 0..=order {
            if n > 0 {
                term = term * k / int(n as i64);
            }
            v.push(term.clone());
        }
        RSeries(v)
    }

    /// `1/g` for `g` with constant term 1.
    pub fn reciprocal(&self) -> Result<RSeries, MathError> {
        self.require_unit()?;
        let n = self.order();
        let mut h = vec![Rational::zero(); n + 1];
        h[0] = Rational::one();
        for k in 1..=n {
            let mut s = Rational::zero();
            for j in 1..=k {
                s += &self.0[j] * &h[k - j];
            }
            h[k] = -s;
        }
        Ok(RSeries(h))
    }

    /// `sqrt(g)` for `g` with constant term 1, via `2 h_0 h_k = g_k - sum h_j h_{k-j}`.
    pub fn sqrt(&self) -> Result<RSeries, MathError> {
        self.require_unit()?;
        let n = self.order();
        let mut h = vec![Rational::zero(); n + 1];
        h[0] = Rational::one();
        for k in 1..=n {
            let mut s = self.0[k].clone();
            for j in 1..k {
                s -= &h[j] * &h[k - j];
            }
            h[k] = s / int(2);
        }
        Ok(RSeries(h))
    }

    fn require_unit(&self) -> Result<(), MathError> {
        if self.0[0].is_one() {
            Ok(())
        } else {
            Err(MathError::NonUnitConstant(fmt_rat(&self.0[0])))
        }
    }

    pub fn cosh_kt(k: &Rational, order: usize) -> RSeries {
        Self::exp_kt(k, order)
            .add(&Self::exp_kt(&-k, order))
            .scale(&rat(1, 2))
    }

    pub fn sinh_kt(k: &Rational, order: usize) -> RSeries {
        Self::exp_kt(k, order)
            .sub(&Self::exp_kt(&-k, order))
            .scale(&rat(1, 2))
    }

    /// Constant-coefficient [`TSeries`] over `chart`.
    pub fn to_tseries(&self, chart: Chart) -> TSeries {
        TSeries::new(
            self.0.iter().map(|c| Poly::constant(chart, c.clone())).collect(),
            Trust::Exact,
        )
    }

    /// Evaluate the truncated polynomial in binary64.
    pub fn eval_f64(&self, t: f64) -> f64 {
        use num_traits::ToPrimitive;
        self.0
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * t + c.to_f64().unwrap_or(f64::NAN))
    }
}

impl fmt::Debug for RSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(fmt_rat).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// The closed forms that occur in the deformation-parameter expansions.
#[derive(Clone, Debug)]
pub enum ClosedForm {
    /// `exp(k t)`
    Exp(Rational),
    /// `sqrt(2 / (1 + exp(-2t)))`
    SqrtRatio,
    /// `2 / (exp(t) + exp(-t))`
    Sech,
    /// `(exp(t) - exp(-t)) / (exp(t) + exp(-t))`
    Tanh,
    /// `sqrt((exp(t) + exp(-t)) / 2)`
    SqrtCosh,
    /// An explicit series, used as an argument of the combinators below.
    Series(RSeries),
    Reciprocal(Box<ClosedForm>),
    Sqrt(Box<ClosedForm>),
    Product(Box<ClosedForm>, Box<ClosedForm>),
    Sum(Box<ClosedForm>, Box<ClosedForm>),
}

/// Expand a closed form to an exact series through `t^order`.
pub fn scalar_series_expand(f: &ClosedForm, order: usize) -> Result<RSeries, MathError> {
    use ClosedForm::*;
    Ok(match f {
        Exp(k) => RSeries::exp_kt(k, order),
        SqrtRatio => RSeries::one(order)
            .add(&RSeries::exp_kt(&int(-2), order))
            .scale(&rat(1, 2))
            .reciprocal()?
            .sqrt()?,
        Sech => RSeries::cosh_kt(&int(1), order).reciprocal()?,
        Tanh => RSeries::sinh_kt(&int(1), order).mul(&RSeries::cosh_kt(&int(1), order).reciprocal()?),
        SqrtCosh => RSeries::cosh_kt(&int(1), order).sqrt()?,
        Series(s) => {
            let mut v = s.0.clone();
            v.resize(order + 1, Rational::zero());
            v.truncate(order + 1);
            RSeries(v)
        }
        Reciprocal(g) => scalar_series_expand(g, order)?.reciprocal()?,
        Sqrt(g) => scalar_series_expand(g, order)?.sqrt()?,
        Product(a, b) => scalar_series_expand(a, order)?.mul(&scalar_series_expand(b, order)?),
        Sum(a, b) => scalar_series_expand(a, order)?.add(&scalar_series_expand(b, order)?),
    })
}
