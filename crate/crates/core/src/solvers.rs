//! Sparse storage and deterministic direct solvers.
//!
//! Factorizations are delegated to `faer`, run single-threaded so that results do not
//! depend on scheduling.

use std::sync::Once;

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, Lu};
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Par, Side};

use crate::Error;

fn sequential() {
    static INIT: Once = Once::new();
    INIT.call_once(|| faer::set_global_parallelism(Par::Seq));
}

/// Compressed sparse row matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

/// Symmetric matrices share the general storage.
pub type SparseSym = SparseMatrix;

impl SparseMatrix {
    /// Build from `(row, col, value)` triplets. Duplicates are summed in input order.
    pub fn from_triplets(nrows: usize, ncols: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0; nrows + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < nrows && c < ncols, "triplet index out of range");
            if last == Some((r, c)) {
                *values.last_mut().expect("entry exists") += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseMatrix { nrows, ncols, row_ptr, col_idx, values }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, 1.0)).collect())
    }

    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let ncols = rows.first().map_or(0, Vec::len);
        let trip = rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().enumerate().filter(|(_, v)| **v != 0.0).map(move |(j, v)| (i, j, *v)))
            .collect();
        Self::from_triplets(rows.len(), ncols, trip)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Stored entries of row `i` as `(column, value)`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[range.clone()].binary_search(&j) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols, "dimension mismatch");
        (0..self.nrows).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    pub fn transpose(&self) -> Self {
        let trip = (0..self.nrows).flat_map(|i| self.row(i).map(move |(j, v)| (j, i, v))).collect();
        Self::from_triplets(self.ncols, self.nrows, trip)
    }

    /// Largest absolute row sum.
    pub fn row_sum_norm(&self) -> f64 {
        (0..self.nrows).map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest entry of `A - A^T` in absolute value.
    pub fn asymmetry(&self) -> f64 {
        let t = self.transpose();
        (0..self.nrows)
            .flat_map(|i| self.row(i).map(move |(j, v)| (i, j, v)))
            .map(|(i, j, v)| (v - t.get(i, j)).abs())
            .chain((0..t.nrows).flat_map(|i| t.row(i).map(move |(j, v)| (i, j, v))).map(|(i, j, v)| (v - self.get(i, j)).abs()))
            .fold(0.0, f64::max)
    }

    /// The submatrix with the given rows and columns, in the given order.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut col_map = vec![usize::MAX; self.ncols];
        for (k, &c) in cols.iter().enumerate() {
            col_map[c] = k;
        }
        let mut trip = Vec::new();
        for (ri, &r) in rows.iter().enumerate() {
            for (c, v) in self.row(r) {
                if col_map[c] != usize::MAX {
                    trip.push((ri, col_map[c], v));
                }
            }
        }
        Self::from_triplets(rows.len(), cols.len(), trip)
    }

    fn to_faer(&self) -> Result<SparseColMat<usize, f64>, Error> {
        let trip: Vec<Triplet<usize, usize, f64>> = (0..self.nrows)
            .flat_map(|i| self.row(i).map(move |(j, v)| Triplet::new(i, j, v)))
            .collect();
        SparseColMat::try_new_from_triplets(self.nrows, self.ncols, &trip)
            .map_err(|_| Error::InvalidMesh("sparse matrix construction failed".into()))
    }
}

fn inf_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn residual(a: &SparseMatrix, x: &[f64], b: &[f64]) -> Vec<f64> {
    a.mul_vec(x).iter().zip(b).map(|(ax, bi)| bi - ax).collect()
}

enum Factor {
    Cholesky(Llt<usize, f64>),
    Lu(Box<Lu<usize, f64>>),
}

impl Factor {
    fn apply(&self, b: &[f64]) -> Vec<f64> {
        let mut rhs = Mat::from_fn(b.len(), 1, |i, _| b[i]);
        match self {
            Factor::Cholesky(f) => f.solve_in_place(rhs.as_mut()),
            Factor::Lu(f) => f.solve_in_place(rhs.as_mut()),
        }
        (0..b.len()).map(|i| rhs[(i, 0)]).collect()
    }
}

/// A reusable factorization with residual-checked solves.
pub struct Factorization {
    matrix: SparseMatrix,
    factor: Factor,
    norm: f64,
    tol: f64,
}

impl Factorization {
    /// Sparse Cholesky factorization of a symmetric positive definite matrix.
    pub fn cholesky(a: &SparseMatrix) -> Result<Self, Error> {
        sequential();
        assert_eq!(a.nrows, a.ncols, "square matrix required");
        let llt = a.to_faer()?.sp_cholesky(Side::Lower).map_err(|_| Error::NotPositiveDefinite)?;
        Ok(Factorization { norm: a.row_sum_norm(), matrix: a.clone(), factor: Factor::Cholesky(llt), tol: 1e-12 })
    }

    /// Sparse LU factorization with partial pivoting.
    pub fn lu(a: &SparseMatrix) -> Result<Self, Error> {
        sequential();
        assert_eq!(a.nrows, a.ncols, "square matrix required");
        let lu = a.to_faer()?.sp_lu().map_err(|_| Error::SingularSystem)?;
        Ok(Factorization { norm: a.row_sum_norm(), matrix: a.clone(), factor: Factor::Lu(Box::new(lu)), tol: 1e-12 })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows
    }

    /// Solve with up to three steps of iterative refinement. Fails when the normwise
    /// backward error `|r| / (|A| |x| + |b|)` (infinity norms) stays above the tolerance.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, Error> {
        let bn = inf_norm(b);
        if bn == 0.0 {
            return Ok(vec![0.0; b.len()]);
        }
        let backward = |x: &[f64], r: &[f64]| inf_norm(r) / (self.norm * inf_norm(x) + bn);
        let mut x = self.factor.apply(b);
        let mut r = residual(&self.matrix, &x, b);
        for _ in 0..3 {
            if backward(&x, &r) <= self.tol {
                break;
            }
            let dx = self.factor.apply(&r);
            x.iter_mut().zip(&dx).for_each(|(xi, d)| *xi += d);
            r = residual(&self.matrix, &x, b);
        }
        let err = backward(&x, &r);
        if !err.is_finite() || err > self.tol {
            return Err(match self.factor {
                Factor::Cholesky(_) => Error::NotPositiveDefinite,
                Factor::Lu(_) => Error::SingularSystem,
            });
        }
        Ok(x)
    }
}

/// Solve `A x = b` for symmetric positive definite `A`.
pub fn spd_solve(a: &SparseMatrix, b: &[f64]) -> Result<Vec<f64>, Error> {
    Factorization::cholesky(a)?.solve(b)
}

/// Solve `K x = b` for a symmetric indefinite, nonsingular `K`.
pub fn sym_indef_solve(k: &SparseMatrix, b: &[f64]) -> Result<Vec<f64>, Error> {
    Factorization::lu(k)?.solve(b)
}

/// Stopping rule of the inverse iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenOptions {
    /// Bound on the relative change of the Rayleigh quotient between iterations.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions { tol: 1e-10, max_iter: 500 }
    }
}

/// Smallest eigenpair of `A x = lambda M x` by inverse iteration with one factorization of `A`.
/// The eigenvector is `M`-normalized with a non-negative sum of entries.
pub fn gen_eig_smallest(a: &SparseMatrix, m: &SparseMatrix) -> Result<(f64, Vec<f64>), Error> {
    gen_eig_smallest_with(a, m, EigenOptions::default())
}

pub fn gen_eig_smallest_with(
    a: &SparseMatrix,
    m: &SparseMatrix,
    opts: EigenOptions,
) -> Result<(f64, Vec<f64>), Error> {
    let n = a.nrows;
    if n == 0 {
        return Err(Error::NoFreeDofs);
    }
    let fac = Factorization::cholesky(a)?;
    let mut x = m.mul_vec(&vec![1.0; n]);
    let mut lambda = f64::INFINITY;
    for _ in 0..opts.max_iter {
        let y = fac.solve(&m.mul_vec(&x))?;
        let my = m.mul_vec(&y);
        let ymy = dot(&y, &my);
        if ymy.is_nan() || ymy <= 0.0 {
            return Err(Error::NotPositiveDefinite);
        }
        let scale = ymy.sqrt();
        x = y.iter().map(|v| v / scale).collect();
        let new = dot(&x, &a.mul_vec(&x));
        let change = (new - lambda).abs() / new.abs();
        lambda = new;
        if change <= opts.tol {
            if x.iter().sum::<f64>() < 0.0 {
                x.iter_mut().for_each(|v| *v = -*v);
            }
            return Ok((lambda, x));
        }
    }
    Err(Error::NoConvergence(opts.max_iter))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_solve() {
        let b = vec![1.0, -2.0, 3.0];
        assert_eq!(spd_solve(&SparseMatrix::identity(3), &b).unwrap(), b);
        assert_eq!(sym_indef_solve(&SparseMatrix::identity(3), &b).unwrap(), b);
    }

    #[test]
    fn small_spd() {
        let a = SparseMatrix::from_dense(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let x = spd_solve(&a, &[3.0, 3.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn small_indefinite() {
        let k = SparseMatrix::from_dense(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let x = sym_indef_solve(&k, &[1.0, 2.0]).unwrap();
        assert_eq!(x, vec![2.0, 1.0]);
    }

    #[test]
    fn indefinite_matrix_is_not_spd() {
        let k = SparseMatrix::from_dense(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert!(spd_solve(&k, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn diagonal_eigen() {
        let a = SparseMatrix::from_dense(&[vec![1.0, 0.0, 0.0], vec![0.0, 2.0, 0.0], vec![0.0, 0.0, 3.0]]);
        let (l, x) = gen_eig_smallest(&a, &SparseMatrix::identity(3)).unwrap();
        assert!((l - 1.0).abs() < 1e-10);
        assert!((x[0] - 1.0).abs() < 1e-5 && x[1].abs() < 1e-5);
    }

    #[test]
    fn pencil_with_itself() {
        let a = SparseMatrix::from_dense(&[vec![4.0, 1.0], vec![1.0, 3.0]]);
        let (l, x) = gen_eig_smallest(&a, &a).unwrap();
        assert!((l - 1.0).abs() < 1e-12);
        assert!((dot(&x, &a.mul_vec(&x)) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn triplet_duplicates_sum() {
        let m = SparseMatrix::from_triplets(2, 2, vec![(0, 0, 1.0), (1, 0, 2.0), (0, 0, 3.0)]);
        assert_eq!(m.get(0, 0), 4.0);
        assert_eq!(m.get(1, 0), 2.0);
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.transpose().get(0, 1), 2.0);
        assert_eq!(m.submatrix(&[1], &[0]).get(0, 0), 2.0);
    }
}
