//! Poisson tensors on GL(2): the quadratic tensor in matrix coordinates, the
//! exponential-chart coordinate series and the transported tensor, plus the
//! Jacobi identity check.

use crate::exactmath::{
    compose, int, revert, Chart, MathError, Poly, Rational, TSeries, Trunc, Trust, DISPLACEMENT, EXPONENTIAL,
    ORDINARY,
};
use num_traits::One;
use serde_json::{json, Value};

/// Antisymmetric 4x4 matrix of polynomials with a shared trust bound.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PoissonTensor {
    chart: Chart,
    entries: Vec<Vec<Poly>>,
    trust: Trust,
}

impl PoissonTensor {
    /// Build from the strict upper triangle; the rest follows by antisymmetry.
    pub fn from_upper(chart: Chart, upper: &[((usize, usize), Poly)], trust: Trust) -> Self {
        let n = chart.nvars();
        let mut entries = vec![vec![Poly::zero(chart); n]; n];
        for ((i, j), p) in upper {
            assert!(i < j, "upper triangle only");
            let p = trust.cap(p);
            entries[*j][*i] = -&p;
            entries[*i][*j] = p;
        }
        PoissonTensor { chart, entries, trust }
    }

    pub fn zero(chart: Chart) -> Self {
        Self::from_upper(chart, &[], Trust::Exact)
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn trust(&self) -> Trust {
        self.trust
    }

    pub fn dim(&self) -> usize {
        self.chart.nvars()
    }

    pub fn entry(&self, i: usize, j: usize) -> &Poly {
        &self.entries[i][j]
    }

    /// Entry with the tensor's trust; diagonal entries are exact zeros.
    pub fn entry_trunc(&self, i: usize, j: usize) -> Trunc {
        Trunc {
            poly: self.entries[i][j].clone(),
            trust: if i == j { Trust::Exact } else { self.trust },
        }
    }

    pub fn scale(&self, k: &Rational) -> PoissonTensor {
        PoissonTensor {
            chart: self.chart,
            entries: self.entries.iter().map(|r| r.iter().map(|p| p.scale(k)).collect()).collect(),
            trust: self.trust,
        }
    }

    /// Entry by variable names, e.g. `("alpha", "beta")`.
    pub fn entry_named(&self, a: &str, b: &str) -> Result<&Poly, MathError> {
        Ok(self.entry(self.chart.index_of(a)?, self.chart.index_of(b)?))
    }

    /// `{f, g} = Lambda^ij d_i f d_j g`.
    pub fn bracket(&self, f: &Trunc, g: &Trunc) -> Trunc {
        let mut out = Trunc::zero(self.chart);
        for i in 0..self.dim() {
            let fi = f.deriv(i);
            if fi.poly.is_zero() && fi.trust == Trust::Exact {
                continue;
            }
            for j in 0..self.dim() {
                if self.entries[i][j].is_zero() && self.trust == Trust::Exact {
                    continue;
                }
                out = out.add(&self.entry_trunc(i, j).mul(&fi).mul(&g.deriv(j)));
            }
        }
        out
    }

    /// JSON dump `{chart, trusted_degree, entries: {"alpha,beta": "..."}}`.
    pub fn to_json(&self) -> Value {
        let mut entries = serde_json::Map::new();
        for i in 0..self.dim() {
            for j in (i + 1)..self.dim() {
                entries.insert(
                    format!("{},{}", self.chart.vars[i], self.chart.vars[j]),
                    Value::String(self.entries[i][j].render()),
                );
            }
        }
        json!({
            "chart": self.chart.name,
            "trusted_degree": self.trust.to_string(),
            "entries": entries,
        })
    }
}

/// The quadratic GL(2) tensor: `{a,b}=ab, {a,c}=ac, {b,c}=0, {b,d}=bd,
/// {c,d}=cd, {a,d}=2bc`.
pub fn ordinary_tensor() -> PoissonTensor {
    let v = Poly::vars(ORDINARY);
    let (a, b, c, d) = (&v[0], &v[1], &v[2], &v[3]);
    PoissonTensor::from_upper(
        ORDINARY,
        &[
            ((0, 1), a * b),
            ((0, 2), a * c),
            ((1, 2), Poly::zero(ORDINARY)),
            ((1, 3), b * d),
            ((2, 3), c * d),
            ((0, 3), (b * c).scale(&int(2))),
        ],
        Trust::Exact,
    )
}

/// Largest coordinate degree supported by the exponential-chart routines.
pub const MAX_EXP_DEGREE: u32 = 4;

fn mat_mul_trunc(x: &[Poly; 4], y: &[Poly; 4], deg: u32) -> [Poly; 4] {
    std::array::from_fn(|k| {
        let (i, j) = (k / 2, k % 2);
        x[2 * i].mul_trunc(&y[j], deg) + x[2 * i + 1].mul_trunc(&y[2 + j], deg)
    })
}

/// `exp X` as polynomials in `(alpha, beta, gamma, delta)` through `deg`,
/// in the order `(a, b, c, d)`, computed term by term.
pub fn exp_matrix_polys(deg: u32) -> [Poly; 4] {
    let x: [Poly; 4] = std::array::from_fn(|k| Poly::var(EXPONENTIAL, k));
    let mut power: [Poly; 4] = std::array::from_fn(|k| {
        if k == 0 || k == 3 {
            Poly::one(EXPONENTIAL)
        } else {
            Poly::zero(EXPONENTIAL)
        }
    });
    let mut sum = power.clone();
    let mut fact = Rational::one();
    for n in 1..=deg {
        power = mat_mul_trunc(&power, &x, deg);
        fact *= int(n as i64);
        for k in 0..4 {
            sum[k] = &sum[k] + power[k].scale(&(Rational::one() / &fact));
        }
    }
    sum
}

/// Coordinate functions `a, b, c, d` as series in the exponential chart.
pub fn exp_chart_functions(coord_degree: u32) -> Result<[TSeries; 4], MathError> {
    if coord_degree > MAX_EXP_DEGREE {
        return Err(MathError::Parse(format!(
            "exponential chart supported through degree {MAX_EXP_DEGREE}, asked {coord_degree}"
        )));
    }
    let polys = exp_matrix_polys(coord_degree);
    Ok(std::array::from_fn(|k| {
        TSeries::from_poly(polys[k].clone(), 0, Trust::Deg(coord_degree as i64))
    }))
}

/// Logarithmic coordinates as polynomials in the displacements `y = T - I`,
/// obtained by formal reversion of `exp X - I` through degree `deg`.
pub fn log_series(deg: u32) -> Result<Vec<Poly>, MathError> {
    let e = exp_matrix_polys(deg);
    let map: Vec<Poly> = (0..4)
        .map(|k| {
            if k == 0 || k == 3 {
                &e[k] - Poly::one(EXPONENTIAL)
            } else {
                e[k].clone()
            }
        })
        .collect();
    revert(&map, DISPLACEMENT, deg)
}

/// Transport the ordinary tensor to the exponential chart through
/// `coord_degree`: `Lambda^kl = (d xi^k/d x_i)(d xi^l/d x_j) Lambda^ij`,
/// evaluated at `x = exp X`.
pub fn exp_chart_tensor(coord_degree: u32) -> Result<PoissonTensor, MathError> {
    if coord_degree > MAX_EXP_DEGREE - 1 {
        return Err(MathError::Parse(format!(
            "transported tensor supported through degree {}, asked {coord_degree}",
            MAX_EXP_DEGREE - 1
        )));
    }
    let deg = coord_degree;
    let xi = log_series(deg + 1)?;
    // d xi^k / d y_i, trusted through deg
    let dxi: Vec<Vec<Poly>> = xi
        .iter()
        .map(|p| (0..4).map(|i| p.deriv(i).truncate(deg)).collect())
        .collect();
    // ordinary tensor written in displacements: x = 1 + y on the diagonal
    let shift: Vec<Poly> = (0..4)
        .map(|k| {
            let y = Poly::var(DISPLACEMENT, k);
            if k == 0 || k == 3 {
                y + Poly::one(DISPLACEMENT)
            } else {
                y
            }
        })
        .collect();
    let lam = ordinary_tensor();
    let lam_y: Vec<Vec<Poly>> = (0..4)
        .map(|i| (0..4).map(|j| compose(lam.entry(i, j), &shift, DISPLACEMENT, u32::MAX)).collect())
        .collect();
    let e = exp_matrix_polys(deg);
    let y_of_x: Vec<Poly> = (0..4)
        .map(|k| if k == 0 || k == 3 { &e[k] - Poly::one(EXPONENTIAL) } else { e[k].clone() })
        .collect();
    let mut upper = Vec::new();
    for k in 0..4 {
        for l in (k + 1)..4 {
            let mut s = Poly::zero(DISPLACEMENT);
            for i in 0..4 {
                for j in 0..4 {
                    if lam_y[i][j].is_zero() {
                        continue;
                    }
                    let t = dxi[k][i].mul_trunc(&dxi[l][j], deg).mul_trunc(&lam_y[i][j], deg);
                    s = s + t;
                }
            }
            upper.push(((k, l), compose(&s, &y_of_x, EXPONENTIAL, deg)));
        }
    }
    Ok(PoissonTensor::from_upper(EXPONENTIAL, &upper, Trust::Deg(deg as i64)))
}

/// Same transport by a second route: invert the Jacobian of `exp` as a
/// Neumann series and conjugate the pulled-back ordinary tensor.
pub fn exp_chart_tensor_by_jacobian(coord_degree: u32) -> PoissonTensor {
    let deg = coord_degree;
    let e = exp_matrix_polys(deg + 1);
    let n: Vec<Vec<Poly>> = (0..4)
        .map(|i| {
            (0..4)
                .map(|j| {
                    let d = e[i].deriv(j).truncate(deg);
                    if i == j {
                        d - Poly::one(EXPONENTIAL)
                    } else {
                        d
                    }
                })
                .collect()
        })
        .collect();
    let matmul = |x: &Vec<Vec<Poly>>, y: &Vec<Vec<Poly>>| -> Vec<Vec<Poly>> {
        (0..4)
            .map(|i| {
                (0..4)
                    .map(|j| (0..4).fold(Poly::zero(EXPONENTIAL), |acc, k| acc + x[i][k].mul_trunc(&y[k][j], deg)))
                    .collect()
            })
            .collect()
    };
    let neg_n: Vec<Vec<Poly>> = n.iter().map(|r| r.iter().map(|p| -p).collect()).collect();
    let mut jinv: Vec<Vec<Poly>> = (0..4)
        .map(|i| (0..4).map(|j| if i == j { Poly::one(EXPONENTIAL) } else { Poly::zero(EXPONENTIAL) }).collect())
        .collect();
    let mut power = jinv.clone();
    for _ in 0..deg {
        power = matmul(&power, &neg_n);
        for i in 0..4 {
            for j in 0..4 {
                jinv[i][j] = &jinv[i][j] + &power[i][j];
            }
        }
    }
    let x_of_xi: Vec<Poly> = e.iter().map(|p| p.truncate(deg)).collect();
    let lam = ordinary_tensor();
    let pulled: Vec<Vec<Poly>> = (0..4)
        .map(|i| (0..4).map(|j| compose_with_constants(lam.entry(i, j), &x_of_xi, deg)).collect())
        .collect();
    let jt: Vec<Vec<Poly>> = (0..4).map(|i| (0..4).map(|j| jinv[j][i].clone()).collect()).collect();
    let full = matmul(&matmul(&jinv, &pulled), &jt);
    let mut upper = Vec::new();
    for k in 0..4 {
        for l in (k + 1)..4 {
            upper.push(((k, l), full[k][l].clone()));
        }
    }
    PoissonTensor::from_upper(EXPONENTIAL, &upper, Trust::Deg(deg as i64))
}

/// Substitution where images may have constant terms; `p` is a polynomial in
/// the ordinary chart and the result is truncated to `deg`.
fn compose_with_constants(p: &Poly, images: &[Poly], deg: u32) -> Poly {
    let mut out = Poly::zero(EXPONENTIAL);
    for (m, c) in p.terms() {
        let mut t = Poly::constant(EXPONENTIAL, c.clone());
        for (i, &k) in m.0.iter().enumerate() {
            for _ in 0..k {
                t = t.mul_trunc(&images[i], deg);
            }
        }
        out = out + t;
    }
    out
}

/// Cyclic sums `sum_l (L^li d_l L^jk + L^lj d_l L^ki + L^lk d_l L^ij)` for
/// every ordered triple, truncated to what the tensor's trust supports.
pub fn jacobi_defect(lam: &PoissonTensor) -> Vec<((usize, usize, usize), Trunc)> {
    let n = lam.dim();
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut s = Trunc::zero(lam.chart());
                for l in 0..n {
                    for (x, y, z) in [(i, j, k), (j, k, i), (k, i, j)] {
                        let t = lam.entry_trunc(l, x).mul(&lam.entry_trunc(y, z).deriv(l));
                        s = s.add(&t);
                    }
                }
                out.push(((i, j, k), s));
            }
        }
    }
    out
}

/// True when every Jacobi cyclic sum vanishes through its trust bound.
pub fn jacobi_holds(lam: &PoissonTensor) -> bool {
    jacobi_defect(lam).iter().all(|(_, t)| t.poly.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::int;
    use crate::liealg::{r_bracket, r_tilde};

    fn e(s: &str) -> Poly {
        Poly::parse(EXPONENTIAL, s).unwrap()
    }

    #[test]
    fn ordinary_entries() {
        let l = ordinary_tensor();
        let o = |s: &str| Poly::parse(ORDINARY, s).unwrap();
        assert_eq!(l.entry_named("a", "d").unwrap(), &o("2*b*c"));
        assert!(l.entry_named("b", "c").unwrap().is_zero());
        assert_eq!(l.entry_named("d", "a").unwrap(), &o("-2*b*c"));
        for i in 0..4 {
            assert!(l.entry(i, i).is_zero());
            for j in 0..4 {
                assert_eq!(l.entry(i, j), &-l.entry(j, i));
            }
        }
    }

    #[test]
    fn exponential_coordinates() {
        let f = exp_chart_functions(3).unwrap();
        assert_eq!(f[0].coeff(0).truncate(2), e("1 + alpha + 1/2*alpha^2 + 1/2*beta*gamma"));
        assert_eq!(
            f[2].coeff(0).truncate(3),
            e("gamma + 1/2*alpha*gamma + 1/2*gamma*delta + 1/6*beta*gamma^2 + 1/6*alpha^2*gamma + 1/6*gamma*delta^2 + 1/6*alpha*gamma*delta")
        );
        let consts: Vec<Rational> = f.iter().map(|s| s.coeff(0).constant_term()).collect();
        assert_eq!(consts, vec![int(1), int(0), int(0), int(1)]);
        assert!(exp_chart_functions(MAX_EXP_DEGREE + 1).is_err());
    }

    #[test]
    fn transported_tensor_low_degree_and_routes_agree() {
        let t = exp_chart_tensor(3).unwrap();
        assert_eq!(t.trust(), Trust::Deg(3));
        assert_eq!(t.entry(0, 1), &e("beta"));
        assert!(t.entry(1, 2).is_zero());
        assert!(t.entry(0, 3).is_zero());
        assert_eq!(t.entry(2, 3), &e("gamma"));
        let j = exp_chart_tensor_by_jacobian(3);
        for a in 0..4 {
            for b in 0..4 {
                assert_eq!(t.entry(a, b).truncate(3), j.entry(a, b).truncate(3));
            }
        }
        assert!(exp_chart_tensor(MAX_EXP_DEGREE).is_err());
    }

    #[test]
    fn transported_tensor_pushes_back_to_the_ordinary_bracket() {
        let deg = 3;
        let lam = exp_chart_tensor(deg).unwrap();
        let images = exp_matrix_polys(deg + 1);
        let ord = ordinary_tensor();
        for u in 0..4 {
            for v in 0..4 {
                let lhs = compose_with_constants(ord.entry(u, v), &images, deg);
                let mut rhs = Poly::zero(EXPONENTIAL);
                for k in 0..4 {
                    for l in 0..4 {
                        rhs = rhs + images[u].deriv(k).mul_trunc(&images[v].deriv(l), deg).mul_trunc(lam.entry(k, l), deg);
                    }
                }
                assert_eq!(lhs, rhs.truncate(deg), "pair ({u},{v})");
            }
        }
    }

    #[test]
    fn jacobi_in_both_charts() {
        assert!(jacobi_holds(&ordinary_tensor()));
        assert!(jacobi_defect(&ordinary_tensor()).iter().all(|(_, t)| t.trust == Trust::Exact));
        assert!(jacobi_holds(&exp_chart_tensor(3).unwrap()));
        assert!(jacobi_holds(&PoissonTensor::zero(ORDINARY)));
    }

    #[test]
    fn jacobi_matches_bracket_cyclic_sums() {
        // oracle: cyclic sums of iterated brackets computed from the r-matrix
        let r = r_tilde().flip();
        let x = Poly::vars(ORDINARY);
        let br = |f: &Poly, g: &Poly| r_bracket(&r, f, g).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    let s = br(&x[i], &br(&x[j], &x[k])) + br(&x[j], &br(&x[k], &x[i])) + br(&x[k], &br(&x[i], &x[j]));
                    assert!(s.is_zero());
                }
            }
        }
    }

    #[test]
    fn bracket_matches_tensor() {
        let l = ordinary_tensor();
        let x = Poly::vars(ORDINARY);
        let f = Trunc::exact(&x[0] * &x[3]);
        let g = Trunc::exact(x[1].clone());
        let r = r_tilde().flip();
        assert_eq!(l.bracket(&f, &g).poly, r_bracket(&r, &f.poly, &g.poly).unwrap());
    }
}
