use std::ops::{Index, IndexMut, Mul};

use crate::Error;

/// Small dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    /// Rows `r0..r1` and columns `c0..c1`.
    pub fn block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Self {
        Self::from_fn(r1 - r0, c1 - c0, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `self^T * a * self`.
    pub fn congruence(&self, a: &Matrix) -> Matrix {
        &(&self.transpose() * a) * self
    }

    /// Basis of the right null space by Gauss-Jordan elimination with partial pivoting.
    /// Pivots below `tol * max_abs` count as zero. Columns of the result span the kernel.
    pub fn null_space(&self, tol: f64) -> Matrix {
        let mut a = self.clone();
        let scale = self.max_abs();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let p = (row..self.rows)
                .max_by(|&i, &j| a[(i, col)].abs().total_cmp(&a[(j, col)].abs()).then(j.cmp(&i)))
                .expect("non-empty");
            if a[(p, col)].abs() <= tol * scale {
                continue;
            }
            for j in 0..self.cols {
                a.data.swap(p * self.cols + j, row * self.cols + j);
            }
            let piv = a[(row, col)];
            for j in 0..self.cols {
                a[(row, j)] /= piv;
            }
            for i in 0..self.rows {
                let f = a[(i, col)];
                if i != row && f != 0.0 {
                    for j in 0..self.cols {
                        let v = a[(row, j)];
                        a[(i, j)] -= f * v;
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut k = Matrix::zeros(self.cols, free.len());
        for (m, &fc) in free.iter().enumerate() {
            k[(fc, m)] = 1.0;
            for (r, &pc) in pivots.iter().enumerate() {
                k[(pc, m)] = -a[(r, fc)];
            }
        }
        k
    }

    /// Inverse by LU with partial pivoting and one step of iterative refinement.
    pub fn inverse(&self) -> Result<Matrix, Error> {
        assert_eq!(self.rows, self.cols, "inverse of a non-square matrix");
        let n = self.rows;
        let lu = Lu::factor(self)?;
        let mut x = Matrix::zeros(n, n);
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            let col = lu.solve(&e);
            for i in 0..n {
                x[(i, j)] = col[i];
            }
        }
        // X <- X + X (I - A X)
        let mut r = self * &x;
        for (k, v) in r.data.iter_mut().enumerate() {
            let diag = if k / n == k % n { 1.0 } else { 0.0 };
            *v = diag - *v;
        }
        for j in 0..n {
            let col: Vec<f64> = (0..n).map(|i| r[(i, j)]).collect();
            let corr = lu.solve(&col);
            for i in 0..n {
                x[(i, j)] += corr[i];
            }
        }
        let resid = (self * &x).data.iter().enumerate().fold(0.0f64, |m, (k, v)| {
            let diag = if k / n == k % n { 1.0 } else { 0.0 };
            m.max((v - diag).abs())
        });
        if !resid.is_finite() || resid > 1e-9 * (1.0 + self.max_abs() * x.max_abs() * 1e-3) {
            return Err(Error::SingularVandermonde);
        }
        Ok(x)
    }
}

struct Lu {
    n: usize,
    lu: Matrix,
    perm: Vec<usize>,
}

impl Lu {
    fn factor(a: &Matrix) -> Result<Lu, Error> {
        let n = a.rows;
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.max_abs();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| lu[(i, k)].abs().total_cmp(&lu[(j, k)].abs()).then(j.cmp(&i)))
                .expect("non-empty");
            if lu[(p, k)].is_nan() || lu[(p, k)].abs() <= 1e-14 * scale {
                return Err(Error::SingularVandermonde);
            }
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    lu.data.swap(p * n + j, k * n + j);
                }
            }
            let piv = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / piv;
                lu[(i, k)] = f;
                for j in k + 1..n {
                    let v = lu[(k, j)];
                    lu[(i, j)] -= f * v;
                }
            }
        }
        Ok(Lu { n, lu, perm })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                y[i] -= self.lu[(i, j)] * y[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                y[i] -= self.lu[(i, j)] * y[j];
            }
            y[i] /= self.lu[(i, i)];
        }
        y
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_space_of_rank_one() {
        let a = Matrix::from_fn(2, 3, |i, j| ((i + 1) * (j + 1)) as f64);
        let k = a.null_space(1e-12);
        assert_eq!(k.cols(), 2);
        let r = &a * &k;
        assert!(r.max_abs() < 1e-14);
    }
    use rand::{Rng, SeedableRng};

    #[test]
    fn identity_inverse() {
        assert_eq!(Matrix::identity(12).inverse().unwrap(), Matrix::identity(12));
    }

    #[test]
    fn diagonal_inverse() {
        let d = Matrix::from_fn(12, 12, |i, j| if i == j { 2.0 } else { 0.0 });
        let inv = d.inverse().unwrap();
        assert_eq!(inv, Matrix::from_fn(12, 12, |i, j| if i == j { 0.5 } else { 0.0 }));
    }

    #[test]
    fn random_inverse_residual() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let a = Matrix::from_fn(12, 12, |i, j| rng.gen_range(-1.0..1.0) + if i == j { 4.0 } else { 0.0 });
        let inv = a.inverse().unwrap();
        let r = &a * &inv;
        let err = (0..12)
            .flat_map(|i| (0..12).map(move |j| (i, j)))
            .map(|(i, j)| (r[(i, j)] - if i == j { 1.0 } else { 0.0 }).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-10);
    }

    #[test]
    fn singular_detected() {
        let a = Matrix::from_fn(3, 3, |i, _| i as f64);
        assert!(matches!(a.inverse(), Err(Error::SingularVandermonde)));
    }
}
