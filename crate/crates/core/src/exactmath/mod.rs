//! Exact rational arithmetic, sparse multivariate polynomials over a named
//! chart, and series truncated both in the deformation parameter `t` and in
//! coordinate degree.

mod chart;
mod poly;
mod scalar;
mod series;

pub use chart::{Chart, DISPLACEMENT, DOUBLED, EXPONENTIAL, ORDINARY};
pub use poly::{compose, revert, Mono, Poly};
pub use scalar::{scalar_series_expand, ClosedForm, RSeries};
pub use series::{series_substitute, TSeries, Trunc, Trust};

use num_bigint::BigInt;
use num_rational::BigRational;

/// Arbitrary-precision rational; always normalized with a positive denominator.
pub type Rational = BigRational;

/// Build `n/d` as a [`Rational`]. Panics on `d == 0`.
pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Build the integer `n` as a [`Rational`].
pub fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

/// Render a rational as `p/q`, omitting `/1`.
pub fn fmt_rat(r: &Rational) -> String {
    if r.denom() == &BigInt::from(1) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parse `p`, `-p` or `p/q`.
pub fn parse_rat(s: &str) -> Result<Rational, MathError> {
    let s = s.trim();
    let bad = || MathError::Parse(format!("not a rational: {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d == BigInt::from(0) {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Errors raised by the exact-arithmetic layer.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MathError {
    #[error("chart mismatch: {left} vs {right}")]
    ChartMismatch { left: String, right: String },
    #[error("series constant term must be 1, got {0}")]
    NonUnitConstant(String),
    #[error("no image given for variable {0}")]
    MissingImage(String),
    #[error("series t-orders differ: {0} vs {1}")]
    OrderMismatch(usize, usize),
    #[error("unknown variable {var} in chart {chart}")]
    UnknownVariable { var: String, chart: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("map is not tangent to the identity at component {0}")]
    NotTangentToIdentity(usize),
}

pub(crate) fn check_chart(left: Chart, right: Chart) -> Result<(), MathError> {
    if left == right {
        Ok(())
    } else {
        Err(MathError::ChartMismatch {
            left: left.name.to_string(),
            right: right.name.to_string(),
        })
    }
}
