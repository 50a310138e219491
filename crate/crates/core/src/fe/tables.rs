use num_bigint::BigInt;

use crate::exact::{rational_to_f64, Rational};
use crate::fe::{Matrix, QuadratureMode};
use crate::quadrature::{integral_mean_combo, GaussRule, IntegralCache};
use crate::ratfun::{BaryPoint, RatCombo};
use crate::Error;

/// The six index pairs `(i, j)`, `i <= j`, of a symmetric 3x3 second-derivative matrix.
pub const HESS_PAIRS: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

/// Position of `(i, j)` or `(j, i)` in [`HESS_PAIRS`].
pub fn hess_pair(i: usize, j: usize) -> usize {
    let (a, b) = (i.min(j), i.max(j));
    match (a, b) {
        (0, 0) => 0,
        (0, 1) => 1,
        (0, 2) => 2,
        (1, 1) => 3,
        (1, 2) => 4,
        (2, 2) => 5,
        _ => panic!("second derivative index out of range"),
    }
}

/// Dense tensor of arbitrary rank, last index fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    dims: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(dims: &[usize]) -> Self {
        Tensor { dims: dims.to_vec(), data: vec![0.0; dims.iter().product()] }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    fn offset(&self, idx: &[usize]) -> usize {
        assert_eq!(idx.len(), self.dims.len(), "tensor rank mismatch");
        idx.iter().zip(&self.dims).fold(0, |acc, (&i, &d)| {
            assert!(i < d, "tensor index out of range");
            acc * d + i
        })
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        let o = self.offset(idx);
        self.data[o] = v;
    }

    /// CSV with one row per entry: `i0,i1,...,value`.
    pub fn to_csv(&self) -> String {
        let mut s: String = (0..self.dims.len()).map(|k| format!("i{k},")).collect();
        s.push_str("value\n");
        for (idx, v) in self.indices().zip(&self.data) {
            for i in idx {
                s.push_str(&i.to_string());
                s.push(',');
            }
            s.push_str(&format!("{v:e}\n"));
        }
        s
    }

    /// All multi-indices in storage order.
    pub fn indices(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.data.len()).map(move |mut k| {
            let mut idx = vec![0; self.dims.len()];
            for (slot, &d) in idx.iter_mut().zip(&self.dims).rev() {
                *slot = k % d;
                k /= d;
            }
            idx
        })
    }
}

impl From<&Matrix> for Tensor {
    fn from(m: &Matrix) -> Self {
        let mut t = Tensor::zeros(&[m.rows(), m.cols()]);
        for i in 0..m.rows() {
            t.data[i * m.cols()..(i + 1) * m.cols()].copy_from_slice(m.row(i));
        }
        t
    }
}

/// A function made ready for repeated integration.
#[derive(Clone, Debug)]
pub enum Prepared {
    Exact(RatCombo),
    Samples(Vec<f64>),
}

/// Computes means over the reference triangle either exactly or with a Gauss rule.
#[derive(Debug)]
pub enum Integrator {
    Exact(IntegralCache),
    Gauss { rule: GaussRule, points: Vec<[f64; 3]> },
}

impl Integrator {
    pub fn new(mode: QuadratureMode) -> Self {
        match mode {
            QuadratureMode::Exact => Integrator::Exact(IntegralCache::new()),
            QuadratureMode::Gauss(n) => {
                let rule = GaussRule::new(n);
                let points = rule.barycentric();
                Integrator::Gauss { rule, points }
            }
        }
    }

    pub fn prepare(&self, f: &RatCombo) -> Result<Prepared, Error> {
        match self {
            Integrator::Exact(_) => Ok(Prepared::Exact(f.clone())),
            Integrator::Gauss { points, .. } => {
                let terms = f.float_terms();
                let samples = points
                    .iter()
                    .map(|l| terms.iter().map(|t| t.eval(l)).sum::<Result<f64, Error>>())
                    .collect::<Result<_, _>>()?;
                Ok(Prepared::Samples(samples))
            }
        }
    }

    /// Mean of the product of two prepared functions.
    pub fn mean_product(&mut self, a: &Prepared, b: &Prepared) -> Result<f64, Error> {
        match (self, a, b) {
            (Integrator::Exact(cache), Prepared::Exact(f), Prepared::Exact(g)) => {
                integral_mean_combo(&f.multiply(g), cache)?.to_f64()
            }
            (Integrator::Gauss { rule, .. }, Prepared::Samples(f), Prepared::Samples(g)) => {
                Ok(2.0 * rule.weights.iter().zip(f).zip(g).map(|((w, x), y)| w * x * y).sum::<f64>())
            }
            _ => panic!("prepared function does not match the integrator"),
        }
    }

    /// Mean of a single function.
    pub fn mean(&mut self, f: &RatCombo) -> Result<f64, Error> {
        let one = self.prepare(&RatCombo::one())?;
        let f = self.prepare(f)?;
        self.mean_product(&f, &one)
    }

    /// Tensor `T[r][s][d][e] = mean(fam_a[r][d] * fam_b[s][e])`. With `symmetric`, the two
    /// families must coincide and only half of the entries are integrated.
    pub fn moment_tensor(
        &mut self,
        fam_a: &[Vec<RatCombo>],
        fam_b: &[Vec<RatCombo>],
        symmetric: bool,
    ) -> Result<Tensor, Error> {
        let da = fam_a.first().map_or(0, Vec::len);
        let db = fam_b.first().map_or(0, Vec::len);
        let pa: Vec<Vec<Prepared>> = fam_a
            .iter()
            .map(|f| f.iter().map(|c| self.prepare(c)).collect::<Result<_, _>>())
            .collect::<Result<_, _>>()?;
        let pb: Vec<Vec<Prepared>> = if symmetric {
            pa.clone()
        } else {
            fam_b
                .iter()
                .map(|f| f.iter().map(|c| self.prepare(c)).collect::<Result<_, _>>())
                .collect::<Result<_, _>>()?
        };
        let mut t = Tensor::zeros(&[fam_a.len(), fam_b.len(), da, db]);
        for r in 0..fam_a.len() {
            for s in 0..fam_b.len() {
                if symmetric && s < r {
                    continue;
                }
                for d in 0..da {
                    for e in 0..db {
                        let v = self.mean_product(&pa[r][d], &pb[s][e])?;
                        t.set(&[r, s, d, e], v);
                        if symmetric {
                            t.set(&[s, r, e, d], v);
                        }
                    }
                }
            }
        }
        Ok(t)
    }
}

/// Lagrange basis of degree `r` on the reference triangle with its nodes in barycentric
/// coordinates. Nodes are `k / r` for `|k| = r`, ordered by descending `k0`, then `k1`.
pub fn lagrange_basis(r: u32) -> Vec<(RatCombo, BaryPoint)> {
    assert!(r >= 1, "Lagrange degree must be positive");
    let mut out = Vec::new();
    for k0 in (0..=r).rev() {
        for k1 in (0..=r - k0).rev() {
            let k = [k0, k1, r - k0 - k1];
            let mut phi = RatCombo::one();
            for (i, &ki) in k.iter().enumerate() {
                for m in 0..ki {
                    let factor = RatCombo::lambda(i)
                        .scale(&Rational::from_integer(BigInt::from(r)))
                        .sub(&RatCombo::constant(Rational::from_integer(BigInt::from(m))))
                        .scale(&Rational::new(BigInt::from(1), BigInt::from(m + 1)));
                    phi = phi.multiply(&factor);
                }
            }
            let node = k.map(|ki| Rational::new(BigInt::from(ki), BigInt::from(r)));
            let [a, b, c] = node;
            out.push((phi, BaryPoint::new(a, b, c).expect("valid node")));
        }
    }
    out
}

/// Moment matrix `C[j][l] = mean(phi_j * b_l)` of the Lagrange basis of degree `r` against `basis`.
pub fn rhs_moments(r: u32, basis: &[RatCombo], integ: &mut Integrator) -> Result<Matrix, Error> {
    let lag = lagrange_basis(r);
    let mut c = Matrix::zeros(lag.len(), basis.len());
    let pb: Vec<Prepared> = basis.iter().map(|b| integ.prepare(b)).collect::<Result<_, _>>()?;
    for (j, (phi, _)) in lag.iter().enumerate() {
        let pp = integ.prepare(phi)?;
        for (l, b) in pb.iter().enumerate() {
            c[(j, l)] = integ.mean_product(&pp, b)?;
        }
    }
    Ok(c)
}

/// Exact evaluation of a function at a point, rounded once.
pub fn eval_exact(f: &RatCombo, p: &BaryPoint) -> Result<f64, Error> {
    Ok(rational_to_f64(&f.evaluate(p)?))
}
