//! Linear combinations of rational barycentric monomials `lambda^alpha / (1 - lambda)^beta`.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::exact::Rational;
use crate::Error;

/// A multi-index over the three barycentric coordinates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex3(pub [u32; 3]);

impl MultiIndex3 {
    pub const ZERO: MultiIndex3 = MultiIndex3([0, 0, 0]);

    pub fn new(a0: u32, a1: u32, a2: u32) -> Self {
        MultiIndex3([a0, a1, a2])
    }

    /// The unit index `e_j`.
    pub fn unit(j: usize) -> Self {
        let mut e = [0; 3];
        e[j] = 1;
        MultiIndex3(e)
    }

    pub fn sum(self) -> u32 {
        self.0.iter().sum()
    }

    pub fn max(self) -> u32 {
        self.0.into_iter().max().unwrap_or(0)
    }

    pub fn is_zero(self) -> bool {
        self.0 == [0, 0, 0]
    }

    pub fn checked_add(self, other: Self) -> Option<Self> {
        Some(MultiIndex3([
            self.0[0].checked_add(other.0[0])?,
            self.0[1].checked_add(other.0[1])?,
            self.0[2].checked_add(other.0[2])?,
        ]))
    }

    pub fn checked_sub(self, other: Self) -> Option<Self> {
        Some(MultiIndex3([
            self.0[0].checked_sub(other.0[0])?,
            self.0[1].checked_sub(other.0[1])?,
            self.0[2].checked_sub(other.0[2])?,
        ]))
    }

    pub fn plus_unit(self, j: usize) -> Self {
        self + Self::unit(j)
    }

    pub fn minus_unit(self, j: usize) -> Option<Self> {
        self.checked_sub(Self::unit(j))
    }
}

impl std::ops::Add for MultiIndex3 {
    type Output = Self;

    fn add(self, other: Self) -> Self {
        self.checked_add(other).expect("multi-index overflow")
    }
}

impl std::ops::Index<usize> for MultiIndex3 {
    type Output = u32;
    fn index(&self, i: usize) -> &u32 {
        &self.0[i]
    }
}

impl fmt::Display for MultiIndex3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.0[0], self.0[1], self.0[2])
    }
}

/// Sobolev integrability exponent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SobolevExponent {
    Finite(f64),
    Infinity,
}

/// Whether `lambda^alpha / (1 - lambda)^beta` lies in `W^{m,p}` of the triangle.
pub fn sobolev_member(alpha: MultiIndex3, beta: MultiIndex3, m: u32, p: SobolevExponent) -> bool {
    let margin = alpha.sum() as i64 - (alpha + beta).max() as i64 - m as i64;
    match p {
        SobolevExponent::Infinity => margin >= 0,
        SobolevExponent::Finite(p) => {
            assert!(p >= 1.0, "integrability exponent must be at least 1");
            // margin > -2/p  <=>  margin * p > -2
            (margin as f64) * p > -2.0
        }
    }
}

/// Whether the mean of `lambda^alpha / (1 - lambda)^beta` over the triangle is finite.
pub fn mean_is_finite(alpha: MultiIndex3, beta: MultiIndex3) -> bool {
    (alpha + beta).max() <= alpha.sum() + 1
}

/// A point of the triangle in exact barycentric coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaryPoint([Rational; 3]);

impl BaryPoint {
    pub fn new(l0: Rational, l1: Rational, l2: Rational) -> Result<Self, Error> {
        let pts = [l0, l1, l2];
        let sum: Rational = pts.iter().sum();
        if !sum.is_one() || pts.iter().any(|l| l.is_negative() || *l > Rational::one()) {
            return Err(Error::DegenerateBarycenter);
        }
        Ok(BaryPoint(pts))
    }

    /// Vertex `j` of the triangle.
    pub fn vertex(j: usize) -> Self {
        let mut pts = [Rational::zero(), Rational::zero(), Rational::zero()];
        pts[j] = Rational::one();
        BaryPoint(pts)
    }

    /// Midpoint of the edge opposite vertex `j`.
    pub fn edge_midpoint(j: usize) -> Self {
        let half = Rational::new(1.into(), 2.into());
        let mut pts = [half.clone(), half.clone(), half];
        pts[j] = Rational::zero();
        BaryPoint(pts)
    }

    pub fn centroid() -> Self {
        let third = Rational::new(1.into(), 3.into());
        BaryPoint([third.clone(), third.clone(), third])
    }

    pub fn coords(&self) -> &[Rational; 3] {
        &self.0
    }

    pub fn to_f64(&self) -> [f64; 3] {
        [0, 1, 2].map(|i| self.0[i].to_f64().expect("finite"))
    }
}

/// A single term `coeff * lambda^alpha / (1 - lambda)^beta`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatTerm {
    pub coeff: Rational,
    pub alpha: MultiIndex3,
    pub beta: MultiIndex3,
}

/// A finite linear combination of rational barycentric monomials.
///
/// Terms are kept in a canonical order and zero coefficients are dropped.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RatCombo {
    terms: BTreeMap<(MultiIndex3, MultiIndex3), Rational>,
}

impl RatCombo {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rational) -> Self {
        Self::monomial(c, MultiIndex3::ZERO, MultiIndex3::ZERO)
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn monomial(coeff: Rational, alpha: MultiIndex3, beta: MultiIndex3) -> Self {
        let mut f = Self::zero();
        f.add_term(coeff, alpha, beta);
        f
    }

    /// The barycentric coordinate `lambda_j`.
    pub fn lambda(j: usize) -> Self {
        Self::monomial(Rational::one(), MultiIndex3::unit(j), MultiIndex3::ZERO)
    }

    /// `lambda^alpha / (1 - lambda)^beta` with unit coefficient.
    pub fn rational(alpha: MultiIndex3, beta: MultiIndex3) -> Self {
        Self::monomial(Rational::one(), alpha, beta)
    }

    pub fn add_term(&mut self, coeff: Rational, alpha: MultiIndex3, beta: MultiIndex3) {
        if coeff.is_zero() {
            return;
        }
        let key = (alpha, beta);
        let entry = self.terms.entry(key).or_insert_with(Rational::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = RatTerm> + '_ {
        self.terms.iter().map(|(&(alpha, beta), c)| RatTerm { coeff: c.clone(), alpha, beta })
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        RatCombo {
            terms: self.terms.iter().map(|(k, v)| (*k, v * c)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&(a, b), c) in &other.terms {
            out.add_term(c.clone(), a, b);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Rational::one()))
    }

    /// Product, using `R^a_b * R^s_t = R^{a+s}_{b+t}`.
    pub fn multiply(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (&(a, b), c) in &self.terms {
            for (&(s, t), d) in &other.terms {
                out.add_term(c * d, a + s, b + t);
            }
        }
        out
    }

    /// Partial derivative with respect to `lambda_j`, treating the coordinates as independent:
    /// `d/d lambda_j R^a_b = a_j R^{a-e_j}_b + b_j R^a_{b+e_j}`.
    pub fn diff_lambda(&self, j: usize) -> Self {
        let mut out = Self::zero();
        for (&(a, b), c) in &self.terms {
            if let Some(a_minus) = a.minus_unit(j) {
                out.add_term(c * Rational::from_integer(a[j].into()), a_minus, b);
            }
            if b[j] > 0 {
                out.add_term(c * Rational::from_integer(b[j].into()), a, b.plus_unit(j));
            }
        }
        out
    }

    pub fn grad_lambda(&self) -> [RatCombo; 3] {
        [0, 1, 2].map(|j| self.diff_lambda(j))
    }

    /// Symmetric matrix of second partial derivatives with respect to the barycentric coordinates.
    pub fn hessian_lambda(&self) -> [[RatCombo; 3]; 3] {
        let g = self.grad_lambda();
        let mut h: [[RatCombo; 3]; 3] = Default::default();
        for i in 0..3 {
            for j in i..3 {
                let d = g[i].diff_lambda(j);
                h[j][i] = d.clone();
                h[i][j] = d;
            }
        }
        h
    }

    /// Exact evaluation.
    ///
    /// At a vertex `v_i` a term with `beta_i > 0` takes the value 0 when the remaining
    /// exponents of `alpha` sum to more than `beta_i`, and is singular otherwise.
    pub fn evaluate(&self, p: &BaryPoint) -> Result<Rational, Error> {
        let l = p.coords();
        let mut acc = Rational::zero();
        for (&(a, b), c) in &self.terms {
            acc += c * eval_term(a, b, l)?;
        }
        Ok(acc)
    }

    /// Floating point evaluation at an interior or edge point. Vertex singularities follow
    /// the same rule as [`RatCombo::evaluate`] and are reported as an error.
    pub fn evaluate_f64(&self, l: &[f64; 3]) -> Result<f64, Error> {
        let mut acc = 0.0;
        for term in self.float_terms() {
            acc += term.eval(l)?;
        }
        Ok(acc)
    }

    /// Terms with coefficients converted to `f64`, for fast repeated evaluation.
    pub fn float_terms(&self) -> Vec<FloatTerm> {
        self.terms
            .iter()
            .map(|(&(alpha, beta), c)| FloatTerm {
                coeff: crate::exact::rational_to_f64(c),
                alpha,
                beta,
            })
            .collect()
    }
}

/// A term of a [`RatCombo`] with a floating point coefficient.
#[derive(Clone, Copy, Debug)]
pub struct FloatTerm {
    pub coeff: f64,
    pub alpha: MultiIndex3,
    pub beta: MultiIndex3,
}

impl FloatTerm {
    pub fn eval(&self, l: &[f64; 3]) -> Result<f64, Error> {
        let mut v = self.coeff;
        for i in 0..3 {
            let b = self.beta[i];
            if b > 0 && l[i] == 1.0 {
                let rest: u32 = (0..3).filter(|&k| k != i).map(|k| self.alpha[k]).sum();
                return if rest > b { Ok(0.0) } else { Err(Error::SingularEvaluation) };
            }
        }
        for i in 0..3 {
            v *= l[i].powi(self.alpha[i] as i32);
            if self.beta[i] > 0 {
                v /= (1.0 - l[i]).powi(self.beta[i] as i32);
            }
        }
        Ok(v)
    }
}

fn eval_term(a: MultiIndex3, b: MultiIndex3, l: &[BigRational; 3]) -> Result<Rational, Error> {
    for i in 0..3 {
        if b[i] > 0 && l[i].is_one() {
            let rest: u32 = (0..3).filter(|&k| k != i).map(|k| a[k]).sum();
            return if rest > b[i] { Ok(Rational::zero()) } else { Err(Error::SingularEvaluation) };
        }
    }
    let mut v = Rational::one();
    for i in 0..3 {
        if a[i] > 0 {
            v *= num_traits::pow(l[i].clone(), a[i] as usize);
        }
        if b[i] > 0 {
            v /= num_traits::pow(Rational::one() - &l[i], b[i] as usize);
        }
    }
    Ok(v)
}

impl fmt::Display for RatCombo {
    /// One term per line: `coeff * lam^(a0,a1,a2) / (1-lam)^(b0,b1,b2)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return writeln!(f, "0");
        }
        for (&(a, b), c) in &self.terms {
            writeln!(f, "{c} * lam^{a} / (1-lam)^{b}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::q;

    fn mi(a: u32, b: u32, c: u32) -> MultiIndex3 {
        MultiIndex3::new(a, b, c)
    }

    #[test]
    fn product_adds_exponents() {
        let f = RatCombo::rational(mi(1, 0, 2), mi(0, 1, 0));
        let g = RatCombo::rational(mi(0, 1, 1), mi(0, 0, 1));
        let h = f.multiply(&g);
        assert_eq!(h, RatCombo::rational(mi(1, 1, 3), mi(0, 1, 1)));
    }

    #[test]
    fn derivative_rule() {
        let f = RatCombo::rational(mi(2, 1, 0), mi(1, 0, 0));
        let d = f.diff_lambda(0);
        let mut expect = RatCombo::monomial(q(2, 1), mi(1, 1, 0), mi(1, 0, 0));
        expect.add_term(q(1, 1), mi(2, 1, 0), mi(2, 0, 0));
        assert_eq!(d, expect);
    }

    #[test]
    fn cancellation_drops_terms() {
        let f = RatCombo::lambda(0);
        assert!(f.sub(&f).is_zero());
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let f = RatCombo::rational(mi(1, 2, 2), mi(0, 1, 1));
        let d = f.diff_lambda(1);
        let l = [0.2, 0.3, 0.5];
        let h = 1e-6;
        let fp = f.evaluate_f64(&[l[0], l[1] + h, l[2]]).unwrap();
        let fm = f.evaluate_f64(&[l[0], l[1] - h, l[2]]).unwrap();
        let fd = (fp - fm) / (2.0 * h);
        assert!((fd - d.evaluate_f64(&l).unwrap()).abs() < 1e-7);
    }

    #[test]
    fn vertex_rule() {
        let bubble = RatCombo::rational(mi(1, 2, 2), mi(0, 1, 1));
        for j in 0..3 {
            assert_eq!(bubble.evaluate(&BaryPoint::vertex(j)).unwrap(), q(0, 1));
        }
        let singular = RatCombo::rational(mi(1, 0, 0), mi(0, 1, 0));
        assert!(matches!(
            singular.evaluate(&BaryPoint::vertex(1)),
            Err(Error::SingularEvaluation)
        ));
    }

    #[test]
    fn bubble_at_centroid() {
        let bubble = RatCombo::rational(mi(1, 2, 2), mi(0, 1, 1));
        assert_eq!(bubble.evaluate(&BaryPoint::centroid()).unwrap(), q(1, 108));
    }

    #[test]
    fn sobolev_examples() {
        let inf = SobolevExponent::Infinity;
        let two = SobolevExponent::Finite(2.0);
        // the face bubble lies in W^{2,inf} but not W^{3,2}
        assert!(sobolev_member(mi(1, 2, 2), mi(0, 1, 1), 2, inf));
        assert!(!sobolev_member(mi(1, 2, 2), mi(0, 1, 1), 3, two));
        assert!(!sobolev_member(mi(0, 0, 0), mi(0, 0, 2), 0, SobolevExponent::Finite(1.0)));
        assert!(sobolev_member(mi(0, 0, 0), mi(0, 0, 0), 0, inf));
    }

    #[test]
    fn bary_point_validation() {
        assert!(BaryPoint::new(q(1, 2), q(1, 2), q(1, 2)).is_err());
        assert!(BaryPoint::new(q(3, 2), q(-1, 2), q(0, 1)).is_err());
        assert!(BaryPoint::new(q(1, 2), q(1, 4), q(1, 4)).is_ok());
    }

    #[test]
    fn display_lists_terms() {
        let f = RatCombo::rational(mi(1, 2, 2), mi(0, 1, 1));
        assert_eq!(f.to_string(), "1 * lam^(1,2,2) / (1-lam)^(0,1,1)\n");
    }
}
