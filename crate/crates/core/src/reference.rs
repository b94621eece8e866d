//! Published target values the pipeline is compared against.
//!
//! These are inputs to comparisons only; nothing downstream consumes them as
//! ground truth.

use crate::exactmath::{
    rat, scalar_series_expand, ClosedForm, MathError, Poly, Rational, TSeries, Trust, EXPONENTIAL, ORDINARY,
};
use crate::poisson::PoissonTensor;

fn p(s: &str) -> Poly {
    Poly::parse(EXPONENTIAL, s).expect("built-in reference polynomial")
}

/// Matrix coordinates in logarithm coordinates through degree 3, as quoted.
pub fn exp_images() -> [Poly; 4] {
    [
        p("1 + alpha + 1/2*alpha^2 + 1/2*beta*gamma + 1/6*alpha^3 + 1/6*alpha*beta*gamma + 1/6*beta*gamma*delta"),
        p("beta + 1/2*alpha*beta + 1/2*beta*delta + 1/6*beta^2*gamma + 1/6*alpha^2*beta + 1/6*beta*delta^2 + 1/6*alpha*beta*delta"),
        p("gamma + 1/2*alpha*gamma + 1/2*gamma*delta + 1/6*beta*gamma^2 + 1/6*alpha^2*gamma + 1/6*gamma*delta^2 + 1/6*alpha*gamma*delta"),
        p("1 + delta + 1/2*delta^2 + 1/2*beta*gamma + 1/6*delta^3 + 1/6*beta*gamma*delta + 1/6*alpha*beta*gamma"),
    ]
}

/// Poisson tensor in logarithm coordinates through degree 3, as quoted.
pub fn exp_tensor() -> PoissonTensor {
    PoissonTensor::from_upper(
        EXPONENTIAL,
        &[
            ((0, 1), p("beta + 1/3*beta^2*gamma + 1/3*alpha^2*beta")),
            ((0, 2), p("gamma + 1/3*beta*gamma^2 + 1/3*alpha^2*gamma")),
            ((1, 3), p("beta + 1/3*beta^2*gamma + 1/3*beta*delta^2")),
            ((2, 3), p("gamma + 1/3*beta*gamma^2 + 1/3*gamma*delta^2")),
            ((1, 2), Poly::zero(EXPONENTIAL)),
            ((0, 3), p("alpha*beta*gamma + beta*gamma*delta")),
        ],
        Trust::Deg(3),
    )
}

/// The six symmetric operators applied to `(a, d)`, through degree 2.
pub fn b_values_ad() -> [Poly; 6] {
    [
        p("-2 - 2*alpha - 2*delta - 5/3*alpha^2 - 2*alpha*delta - 5/3*delta^2 - 10/3*beta*gamma"),
        p("-4 - 4*alpha - 4*delta - 10/3*alpha^2 - 4*alpha*delta - 10/3*delta^2 - 32/3*beta*gamma"),
        p("-28/3*beta*gamma"),
        p("2*beta*gamma"),
        p("8/3*beta*gamma"),
        p("16/3*beta*gamma"),
    ]
}

/// First two cases of the quoted index-by-index expansion of operator 1 on
/// `(a, d)`: `(i1, j1) = (alpha, beta)` and the sixth case `(delta, beta)`.
pub fn wheel_cases_ad() -> [((usize, usize), Poly); 2] {
    [
        ((0, 1), p("-1 - alpha - delta - 5/6*alpha^2 - alpha*delta - 5/6*delta^2 - 11/6*beta*gamma")),
        ((3, 1), p("1/6*beta*gamma")),
    ]
}

/// A linear row `coeffs . x = rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotedRow {
    pub coeffs: Vec<Rational>,
    pub rhs: Rational,
}

fn row(c: &[i64], rhs: Rational) -> QuotedRow {
    QuotedRow {
        coeffs: c.iter().map(|&x| rat(x, 1)).collect(),
        rhs,
    }
}

/// Seven rows over `a_G1 .. a_G6` for the exponential chart.
pub fn exponential_rows() -> Vec<QuotedRow> {
    vec![
        row(&[1, 2, 0, 0, 0, 0], rat(0, 1)),
        row(&[10, 32, 28, -6, -8, -16], rat(0, 1)),
        row(&[0, 0, 8, 0, 1, 4], rat(0, 1)),
        row(&[0, 0, 8, 0, 2, 4], rat(-3, 2)),
        row(&[0, 0, 0, 0, 1, 2], rat(-1, 8)),
        row(&[-1, -2, -6, 0, 4, 8], rat(-9, 16)),
        row(&[-1, 2, 2, 0, 2, 4], rat(-3, 16)),
    ]
}

/// Five rows over `K1 .. K6, K1^2` for the matrix-coordinate chart.
pub fn ordinary_rows() -> Vec<QuotedRow> {
    vec![
        row(&[0, 0, 2, 1, 0, 0, 0], rat(7, 48)),
        row(&[0, 0, 1, 2, 0, 0, 0], rat(1, 6)),
        row(&[0, 0, 0, 1, 0, 0, 0], rat(1, 12)),
        row(&[0, 0, 0, 1, 0, 0, 0], rat(1, 12) - rat(1, 8)),
        row(&[0, 2, 0, 1, 0, 0, 1], rat(1, 12)),
    ]
}

/// Closed-form products of coordinate functions: `(u, v, expected u*v)`.
pub fn star_relations(t_order: usize) -> Result<Vec<(usize, usize, TSeries)>, MathError> {
    let sr = scalar_series_expand(&ClosedForm::SqrtRatio, t_order)?;
    let sech = scalar_series_expand(&ClosedForm::Sech, t_order)?;
    let tanh = scalar_series_expand(&ClosedForm::Tanh, t_order)?;
    let v = Poly::vars(ORDINARY);
    let times = |s: &crate::exactmath::RSeries, q: &Poly| s.to_tseries(ORDINARY).mul(&TSeries::from_poly(q.clone(), t_order, Trust::Exact));
    let mut out = Vec::new();
    for i in 0..4 {
        out.push((i, i, TSeries::from_poly(&v[i] * &v[i], t_order, Trust::Exact)));
    }
    for (i, j) in [(0, 1), (0, 2), (1, 3), (2, 3)] {
        out.push((i, j, times(&sr, &(&v[i] * &v[j]))));
    }
    out.push((1, 2, times(&sech, &(&v[1] * &v[2]))));
    out.push((
        0,
        3,
        TSeries::from_poly(&v[0] * &v[3], t_order, Trust::Exact).add(&times(&tanh, &(&v[1] * &v[2]))),
    ));
    Ok(out)
}
