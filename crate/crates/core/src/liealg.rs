//! Concrete gl(2) tensor calculus: r-matrices, the modified classical
//! Yang-Baxter defect, invariant vector fields on matrix coordinates and the
//! Poisson bracket they induce.

use crate::exactmath::{int, MathError, Poly, Rational, ORDINARY};
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// Names of the fixed basis `(E11, E12, E21, E22)`; index `k = 2i + j`.
pub const BASIS_NAMES: [&str; 4] = ["E11", "E12", "E21", "E22"];

/// A 2x2 rational matrix.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Mat2(pub [[Rational; 2]; 2]);

impl Mat2 {
    pub fn zero() -> Self {
        Mat2(std::array::from_fn(|_| std::array::from_fn(|_| Rational::zero())))
    }

    /// Matrix unit `E_ij`.
    pub fn unit(i: usize, j: usize) -> Self {
        let mut m = Self::zero();
        m.0[i][j] = Rational::one();
        m
    }

    /// Basis element number `k` of `(E11, E12, E21, E22)`.
    pub fn basis(k: usize) -> Self {
        Self::unit(k / 2, k % 2)
    }

    pub fn x_plus() -> Self {
        Self::unit(0, 1)
    }

    pub fn x_minus() -> Self {
        Self::unit(1, 0)
    }

    pub fn h() -> Self {
        Self::unit(0, 0).sub(&Self::unit(1, 1))
    }

    pub fn identity() -> Self {
        Self::unit(0, 0).add(&Self::unit(1, 1))
    }

    pub fn add(&self, o: &Mat2) -> Mat2 {
        Mat2(std::array::from_fn(|i| std::array::from_fn(|j| &self.0[i][j] + &o.0[i][j])))
    }

    pub fn sub(&self, o: &Mat2) -> Mat2 {
        Mat2(std::array::from_fn(|i| std::array::from_fn(|j| &self.0[i][j] - &o.0[i][j])))
    }

    pub fn scale(&self, k: &Rational) -> Mat2 {
        Mat2(std::array::from_fn(|i| std::array::from_fn(|j| &self.0[i][j] * k)))
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        Mat2(std::array::from_fn(|i| {
            std::array::from_fn(|j| &self.0[i][0] * &o.0[0][j] + &self.0[i][1] * &o.0[1][j])
        }))
    }

    pub fn commutator(&self, o: &Mat2) -> Mat2 {
        self.mul(o).sub(&o.mul(self))
    }

    /// Coordinates on `(E11, E12, E21, E22)`.
    pub fn coords(&self) -> [Rational; 4] {
        std::array::from_fn(|k| self.0[k / 2][k % 2].clone())
    }
}

/// `[E_a, E_b]` on the fixed basis, as a coordinate vector.
pub fn structure_bracket(a: usize, b: usize) -> [Rational; 4] {
    Mat2::basis(a).commutator(&Mat2::basis(b)).coords()
}

/// Element of `g (x) g` or `g (x) g (x) g` on the fixed basis.
#[derive(Clone, PartialEq, Eq)]
pub struct TensorElem {
    arity: usize,
    terms: BTreeMap<Vec<usize>, Rational>,
}

impl TensorElem {
    pub fn zero(arity: usize) -> Self {
        TensorElem {
            arity,
            terms: BTreeMap::new(),
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, idx: &[usize]) -> Rational {
        self.terms.get(idx).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn add_term(&mut self, idx: Vec<usize>, c: Rational) {
        assert_eq!(idx.len(), self.arity);
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(idx.clone()).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&idx);
        }
    }

    /// Pure tensor of matrices, expanded on the basis.
    pub fn pure(factors: &[Mat2]) -> Self {
        let mut out = TensorElem::zero(factors.len());
        let coords: Vec<[Rational; 4]> = factors.iter().map(Mat2::coords).collect();
        let mut idx = vec![0usize; factors.len()];
        loop {
            let mut c = Rational::one();
            for (s, &k) in idx.iter().enumerate() {
                c *= &coords[s][k];
            }
            out.add_term(idx.clone(), c);
            let mut s = 0;
            loop {
                if s == idx.len() {
                    return out;
                }
                idx[s] += 1;
                if idx[s] < 4 {
                    break;
                }
                idx[s] = 0;
                s += 1;
            }
        }
    }

    pub fn add(&self, o: &TensorElem) -> TensorElem {
        assert_eq!(self.arity, o.arity);
        let mut out = self.clone();
        for (k, c) in &o.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, o: &TensorElem) -> TensorElem {
        self.add(&o.scale(&int(-1)))
    }

    pub fn scale(&self, k: &Rational) -> TensorElem {
        let mut out = TensorElem::zero(self.arity);
        for (i, c) in &self.terms {
            out.add_term(i.clone(), c * k);
        }
        out
    }

    /// Permute slots: slot `s` of the result holds slot `perm[s]` of `self`.
    pub fn permute(&self, perm: &[usize]) -> TensorElem {
        let mut out = TensorElem::zero(self.arity);
        for (i, c) in &self.terms {
            out.add_term(perm.iter().map(|&p| i[p]).collect(), c.clone());
        }
        out
    }

    /// Swap the two slots of an arity-2 element.
    pub fn flip(&self) -> TensorElem {
        self.permute(&[1, 0])
    }

    /// Full antisymmetrization `(1/k!) sum sgn(s) s(e)`.
    pub fn alternation(&self) -> TensorElem {
        let perms = permutations(self.arity);
        let mut out = TensorElem::zero(self.arity);
        for (p, sign) in &perms {
            out = out.add(&self.permute(p).scale(&int(*sign)));
        }
        out.scale(&Rational::new(1.into(), (perms.len() as i64).into()))
    }

    pub fn is_alternating(&self) -> bool {
        *self == self.alternation()
    }

    /// Diagonal adjoint action `sum_s ad_X` acting on slot `s`.
    pub fn ad(&self, x: &Mat2) -> TensorElem {
        let xc = x.coords();
        let mut out = TensorElem::zero(self.arity);
        for (idx, c) in &self.terms {
            for s in 0..self.arity {
                for (a, xa) in xc.iter().enumerate() {
                    if xa.is_zero() {
                        continue;
                    }
                    let br = structure_bracket(a, idx[s]);
                    for (k, bk) in br.iter().enumerate() {
                        if !bk.is_zero() {
                            let mut j = idx.clone();
                            j[s] = k;
                            out.add_term(j, c * xa * bk);
                        }
                    }
                }
            }
        }
        out
    }

    pub fn is_invariant(&self) -> bool {
        (0..4).all(|k| self.ad(&Mat2::basis(k)).is_zero())
    }

    /// Signed sum of basis tuples, e.g. `+1·(E11, E12, E21)`.
    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        self.terms
            .iter()
            .map(|(i, c)| {
                let names: Vec<&str> = i.iter().map(|&k| BASIS_NAMES[k]).collect();
                let sign = if c < &Rational::zero() { "-" } else { "+" };
                let abs = if c < &Rational::zero() { -c } else { c.clone() };
                format!("{sign}{}·({})", crate::exactmath::fmt_rat(&abs), names.join(", "))
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl fmt::Debug for TensorElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

fn permutations(k: usize) -> Vec<(Vec<usize>, i64)> {
    fn rec(prefix: &mut Vec<usize>, rest: &mut Vec<usize>, sign: i64, out: &mut Vec<(Vec<usize>, i64)>) {
        if rest.is_empty() {
            out.push((prefix.clone(), sign));
            return;
        }
        for i in 0..rest.len() {
            let x = rest.remove(i);
            prefix.push(x);
            rec(prefix, rest, if i % 2 == 0 { sign } else { -sign }, out);
            prefix.pop();
            rest.insert(i, x);
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut (0..k).collect(), 1, &mut out);
    out
}

/// The standard GL(2) r-matrix `X+ (x) X- - X- (x) X+`.
pub fn r_tilde() -> TensorElem {
    TensorElem::pure(&[Mat2::x_plus(), Mat2::x_minus()])
        .sub(&TensorElem::pure(&[Mat2::x_minus(), Mat2::x_plus()]))
}

/// Outcome of [`cybe_defect`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CybeDefect {
    pub i123: TensorElem,
    pub alternating: bool,
    pub invariant: bool,
}

/// `[r12, r13] + [r12, r23] + [r13, r23]` and its two structural properties.
pub fn cybe_defect(r: &TensorElem) -> CybeDefect {
    assert_eq!(r.arity(), 2, "r-matrix must have arity 2");
    let mut i123 = TensorElem::zero(3);
    let terms: Vec<(&Vec<usize>, &Rational)> = r.terms().collect();
    for (ab, c1) in &terms {
        for (cd, c2) in &terms {
            let (a, b, c, d) = (ab[0], ab[1], cd[0], cd[1]);
            let w = *c1 * *c2;
            // [r12, r13]: [x_a, x_c] (x) x_b (x) x_d
            for (k, v) in structure_bracket(a, c).iter().enumerate() {
                i123.add_term(vec![k, b, d], &w * v);
            }
            // [r12, r23]: x_a (x) [x_b, x_c] (x) x_d
            for (k, v) in structure_bracket(b, c).iter().enumerate() {
                i123.add_term(vec![a, k, d], &w * v);
            }
            // [r13, r23]: x_a (x) x_c (x) [x_b, x_d]
            for (k, v) in structure_bracket(b, d).iter().enumerate() {
                i123.add_term(vec![a, c, k], &w * v);
            }
        }
    }
    CybeDefect {
        alternating: i123.is_alternating(),
        invariant: i123.is_invariant(),
        i123,
    }
}

/// Which invariant vector field a matrix generates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `X^l t_ij = (T X)_ij`
    Left,
    /// `X^r t_ij = (X T)_ij`
    Right,
}

fn check_ordinary(p: &Poly) -> Result<(), MathError> {
    if p.chart() == ORDINARY {
        Ok(())
    } else {
        Err(MathError::ChartMismatch {
            left: p.chart().name.into(),
            right: ORDINARY.name.into(),
        })
    }
}

/// Image of the coordinate `t_ij` (variable `2i + j`) under the field.
fn field_on_coordinate(x: &Mat2, side: Side, i: usize, j: usize) -> Poly {
    let mut out = Poly::zero(ORDINARY);
    for k in 0..2 {
        let (var, c) = match side {
            Side::Left => (2 * i + k, &x.0[k][j]),
            Side::Right => (2 * k + j, &x.0[i][k]),
        };
        out = out + Poly::var(ORDINARY, var).scale(c);
    }
    out
}

/// Apply the left or right invariant vector field of `x` to `p` (Leibniz rule).
pub fn invariant_field_apply(x: &Mat2, side: Side, p: &Poly) -> Result<Poly, MathError> {
    check_ordinary(p)?;
    let mut out = Poly::zero(ORDINARY);
    for v in 0..4 {
        let d = p.deriv(v);
        if !d.is_zero() {
            out = out + field_on_coordinate(x, side, v / 2, v % 2) * d;
        }
    }
    Ok(out)
}

/// `{phi, psi} = r^ij (X_i^l phi X_j^l psi - X_i^r phi X_j^r psi)`, taken as written.
pub fn r_bracket(r: &TensorElem, phi: &Poly, psi: &Poly) -> Result<Poly, MathError> {
    check_ordinary(phi)?;
    check_ordinary(psi)?;
    let mut out = Poly::zero(ORDINARY);
    for (ij, c) in r.terms() {
        let (xi, xj) = (Mat2::basis(ij[0]), Mat2::basis(ij[1]));
        let left = invariant_field_apply(&xi, Side::Left, phi)? * invariant_field_apply(&xj, Side::Left, psi)?;
        let right = invariant_field_apply(&xi, Side::Right, phi)? * invariant_field_apply(&xj, Side::Right, psi)?;
        out = out + (left - right).scale(c);
    }
    Ok(out)
}

/// A basis of gl(2) given by four linearly independent matrices.
///
/// Used to recompute the Yang-Baxter defect with other structure constants.
#[derive(Clone, Debug)]
pub struct LieBasis {
    pub mats: [Mat2; 4],
    inverse: [[Rational; 4]; 4],
}

impl LieBasis {
    pub fn new(mats: [Mat2; 4]) -> Option<Self> {
        // columns are the E-coordinates of each basis matrix
        let m: [[Rational; 4]; 4] = std::array::from_fn(|r| std::array::from_fn(|c| mats[c].coords()[r].clone()));
        let inverse = invert4(&m)?;
        Some(LieBasis { mats, inverse })
    }

    /// Coordinates of a matrix on this basis.
    pub fn decompose(&self, x: &Mat2) -> [Rational; 4] {
        let e = x.coords();
        std::array::from_fn(|r| (0..4).map(|c| &self.inverse[r][c] * &e[c]).sum())
    }

    /// Re-express an E-basis tensor on this basis.
    pub fn to_basis(&self, t: &TensorElem) -> TensorElem {
        let mut out = TensorElem::zero(t.arity());
        let cols: Vec<[Rational; 4]> = (0..4).map(|k| self.decompose(&Mat2::basis(k))).collect();
        for (idx, c) in t.terms() {
            let mut partial: Vec<(Vec<usize>, Rational)> = vec![(vec![], c.clone())];
            for &k in idx {
                let mut next = Vec::new();
                for (p, w) in &partial {
                    for (b, v) in cols[k].iter().enumerate() {
                        if !v.is_zero() {
                            let mut p2 = p.clone();
                            p2.push(b);
                            next.push((p2, w * v));
                        }
                    }
                }
                partial = next;
            }
            for (p, w) in partial {
                out.add_term(p, w);
            }
        }
        out
    }

    /// Re-express a tensor on this basis back on the E-basis.
    pub fn from_basis(&self, t: &TensorElem) -> TensorElem {
        let mut out = TensorElem::zero(t.arity());
        for (idx, c) in t.terms() {
            let factors: Vec<Mat2> = idx.iter().map(|&k| self.mats[k].clone()).collect();
            out = out.add(&TensorElem::pure(&factors).scale(c));
        }
        out
    }

    /// Yang-Baxter defect computed with this basis' structure constants; the
    /// result is converted back to the E-basis.
    pub fn cybe_defect(&self, r: &TensorElem) -> TensorElem {
        let rb = self.to_basis(r);
        let br = |a: usize, b: usize| self.decompose(&self.mats[a].commutator(&self.mats[b]));
        let mut i123 = TensorElem::zero(3);
        let terms: Vec<(&Vec<usize>, &Rational)> = rb.terms().collect();
        for (ab, c1) in &terms {
            for (cd, c2) in &terms {
                let (a, b, c, d) = (ab[0], ab[1], cd[0], cd[1]);
                let w = *c1 * *c2;
                for (k, v) in br(a, c).iter().enumerate() {
                    i123.add_term(vec![k, b, d], &w * v);
                }
                for (k, v) in br(b, c).iter().enumerate() {
                    i123.add_term(vec![a, k, d], &w * v);
                }
                for (k, v) in br(b, d).iter().enumerate() {
                    i123.add_term(vec![a, c, k], &w * v);
                }
            }
        }
        self.from_basis(&i123)
    }
}

fn invert4(m: &[[Rational; 4]; 4]) -> Option<[[Rational; 4]; 4]> {
    let mut a: Vec<Vec<Rational>> = m.iter().map(|r| r.to_vec()).collect();
    let mut inv: Vec<Vec<Rational>> = (0..4)
        .map(|i| (0..4).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect())
        .collect();
    for col in 0..4 {
        let piv = (col..4).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        inv.swap(col, piv);
        let p = a[col][col].clone();
        for j in 0..4 {
            a[col][j] = &a[col][j] / &p;
            inv[col][j] = &inv[col][j] / &p;
        }
        for r in 0..4 {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for j in 0..4 {
                    let (x, y) = (&a[col][j] * &f, &inv[col][j] * &f);
                    a[r][j] -= x;
                    inv[r][j] -= y;
                }
            }
        }
    }
    Some(std::array::from_fn(|i| std::array::from_fn(|j| inv[i][j].clone())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::{rat, Poly};
    use proptest::prelude::*;

    type M8 = Vec<Vec<Rational>>;

    fn kron(ms: &[&Mat2]) -> M8 {
        let mut out: M8 = vec![vec![Rational::one()]];
        for m in ms {
            let n = out.len();
            let mut next = vec![vec![Rational::zero(); 2 * n]; 2 * n];
            for i in 0..n {
                for j in 0..n {
                    for a in 0..2 {
                        for b in 0..2 {
                            next[2 * i + a][2 * j + b] = &out[i][j] * &m.0[a][b];
                        }
                    }
                }
            }
            out = next;
        }
        out
    }

    fn add(x: &M8, y: &M8) -> M8 {
        x.iter().zip(y).map(|(r, s)| r.iter().zip(s).map(|(a, b)| a + b).collect()).collect()
    }

    fn mul(x: &M8, y: &M8) -> M8 {
        let n = x.len();
        (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|k| &x[i][k] * &y[k][j]).sum()).collect())
            .collect()
    }

    fn comm(x: &M8, y: &M8) -> M8 {
        let (a, b) = (mul(x, y), mul(y, x));
        a.iter().zip(&b).map(|(r, s)| r.iter().zip(s).map(|(p, q)| p - q).collect()).collect()
    }

    fn zero8() -> M8 {
        vec![vec![Rational::zero(); 8]; 8]
    }

    /// Defect from 8x8 matrices, independent of the structure constants.
    fn defect_by_matrices(r: &TensorElem) -> M8 {
        let id = Mat2::identity();
        let (mut r12, mut r13, mut r23) = (zero8(), zero8(), zero8());
        for (ab, c) in r.terms() {
            let (x, y) = (Mat2::basis(ab[0]), Mat2::basis(ab[1]));
            let sc = |m: M8| -> M8 { m.into_iter().map(|row| row.into_iter().map(|v| v * c).collect()).collect() };
            r12 = add(&r12, &sc(kron(&[&x, &y, &id])));
            r13 = add(&r13, &sc(kron(&[&x, &id, &y])));
            r23 = add(&r23, &sc(kron(&[&id, &x, &y])));
        }
        add(&add(&comm(&r12, &r13), &comm(&r12, &r23)), &comm(&r13, &r23))
    }

    fn tensor_to_matrix(t: &TensorElem) -> M8 {
        let mut out = zero8();
        for (idx, c) in t.terms() {
            let (a, b, d) = (Mat2::basis(idx[0]), Mat2::basis(idx[1]), Mat2::basis(idx[2]));
            let k = kron(&[&a, &b, &d]);
            out = add(&out, &k.into_iter().map(|row| row.into_iter().map(|v| v * c).collect()).collect());
        }
        out
    }

    fn ordinary(s: &str) -> Poly {
        Poly::parse(ORDINARY, s).unwrap()
    }

    #[test]
    fn r_tilde_is_antisymmetric() {
        assert!(r_tilde().add(&r_tilde().flip()).is_zero());
    }

    #[test]
    fn zero_r_matrix_has_trivial_defect() {
        let d = cybe_defect(&TensorElem::zero(2));
        assert!(d.i123.is_zero() && d.alternating && d.invariant);
    }

    #[test]
    fn r_tilde_satisfies_modified_cybe() {
        let d = cybe_defect(&r_tilde());
        assert!(!d.i123.is_zero());
        assert!(d.alternating);
        assert!(d.invariant);
        assert_eq!(tensor_to_matrix(&d.i123), defect_by_matrices(&r_tilde()));
    }

    #[test]
    fn defect_is_a_multiple_of_the_alternation() {
        let d = cybe_defect(&r_tilde()).i123;
        let alt = TensorElem::pure(&[Mat2::h(), Mat2::x_plus(), Mat2::x_minus()]).alternation();
        let (idx, c) = alt.terms().next().unwrap();
        let lambda = d.coeff(idx) / c;
        assert!(!lambda.is_zero());
        assert_eq!(d, alt.scale(&lambda));
        assert_eq!(lambda, rat(6, 1));
    }

    #[test]
    fn defect_is_basis_independent() {
        let e = |k| Mat2::basis(k);
        let reference = cybe_defect(&r_tilde()).i123;
        for perm in [[1, 0, 2, 3], [3, 2, 1, 0], [2, 3, 0, 1]] {
            let b = LieBasis::new(perm.map(e)).unwrap();
            assert_eq!(b.cybe_defect(&r_tilde()), reference);
        }
        let b = LieBasis::new([Mat2::h(), Mat2::x_plus(), Mat2::x_minus(), Mat2::identity()]).unwrap();
        assert_eq!(b.cybe_defect(&r_tilde()), reference);
    }

    #[test]
    fn invariant_fields_on_coordinates() {
        let xp = Mat2::x_plus();
        let xm = Mat2::x_minus();
        assert!(invariant_field_apply(&xp, Side::Left, &ordinary("a")).unwrap().is_zero());
        assert_eq!(invariant_field_apply(&xp, Side::Left, &ordinary("b")).unwrap(), ordinary("a"));
        assert!(invariant_field_apply(&xm, Side::Right, &ordinary("b")).unwrap().is_zero());
        assert_eq!(invariant_field_apply(&xm, Side::Right, &ordinary("d")).unwrap(), ordinary("b"));
        for k in 0..4 {
            for side in [Side::Left, Side::Right] {
                assert!(invariant_field_apply(&Mat2::basis(k), side, &ordinary("1")).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn left_and_right_actions_commute() {
        for x in 0..4 {
            for y in 0..4 {
                for v in 0..4 {
                    let p = Poly::var(ORDINARY, v);
                    let (mx, my) = (Mat2::basis(x), Mat2::basis(y));
                    let lr = invariant_field_apply(&mx, Side::Left, &invariant_field_apply(&my, Side::Right, &p).unwrap()).unwrap();
                    let rl = invariant_field_apply(&my, Side::Right, &invariant_field_apply(&mx, Side::Left, &p).unwrap()).unwrap();
                    assert_eq!(lr, rl);
                }
            }
        }
    }

    #[test]
    fn literal_bracket_is_the_negated_quadratic_structure() {
        let expected = [
            ("a", "b", "a*b"),
            ("a", "c", "a*c"),
            ("b", "c", "0"),
            ("b", "d", "b*d"),
            ("c", "d", "c*d"),
            ("a", "d", "2*b*c"),
        ];
        let flipped = r_tilde().flip();
        for (f, g, e) in expected {
            let literal = r_bracket(&r_tilde(), &ordinary(f), &ordinary(g)).unwrap();
            assert_eq!(literal, -ordinary(e));
            assert_eq!(r_bracket(&flipped, &ordinary(f), &ordinary(g)).unwrap(), ordinary(e));
        }
    }

    #[test]
    fn bracket_rejects_other_charts() {
        let p = Poly::var(crate::exactmath::EXPONENTIAL, 0);
        assert!(r_bracket(&r_tilde(), &p, &ordinary("a")).is_err());
    }

    fn small_poly() -> impl Strategy<Value = Poly> {
        proptest::collection::vec((-3i64..=3, 0u32..=1, 0u32..=1, 0u32..=1, 0u32..=1), 1..4).prop_map(|ts| {
            let mut p = Poly::zero(ORDINARY);
            for (c, a, b, cc, d) in ts {
                let m = Poly::var(ORDINARY, 0).pow(a) * Poly::var(ORDINARY, 1).pow(b) * Poly::var(ORDINARY, 2).pow(cc) * Poly::var(ORDINARY, 3).pow(d);
                p = p + m.scale(&rat(c, 1));
            }
            p
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn bracket_is_antisymmetric_leibniz_and_jacobi(f in small_poly(), g in small_poly(), h in small_poly()) {
            let r = r_tilde();
            let br = |x: &Poly, y: &Poly| r_bracket(&r, x, y).unwrap();
            prop_assert_eq!(br(&f, &g), -br(&g, &f));
            prop_assert_eq!(br(&f, &(&g * &h)), &br(&f, &g) * &h + &g * &br(&f, &h));
            let jac = br(&f, &br(&g, &h)) + br(&g, &br(&h, &f)) + br(&h, &br(&f, &g));
            prop_assert!(jac.is_zero());
        }
    }
}
