#![allow(clippy::needless_range_loop)]

#![allow(dead_code)]
//! Independent numerical oracles used by the integration tests.

use ratfem::quadrature::gauss_legendre;
use ratfem::MultiIndex3;

/// Mean of `lambda^alpha / (1 - lambda)^beta` over the reference triangle by Duffy-collapsed
/// tensor Gauss quadrature. The triangle is split into six pieces, each touching exactly one
/// vertex, and each piece is collapsed at that vertex so the integrand becomes smooth.
/// The order is doubled until two successive results agree to `1e-13` relative.
pub fn duffy_mean(alpha: MultiIndex3, beta: MultiIndex3) -> f64 {
    let mut prev = duffy_mean_order(alpha, beta, 8);
    let mut n = 16;
    loop {
        let cur = duffy_mean_order(alpha, beta, n);
        if (cur - prev).abs() <= 1e-13 * cur.abs().max(1e-300) || n >= 256 {
            return cur;
        }
        prev = cur;
        n *= 2;
    }
}

fn duffy_mean_order(alpha: MultiIndex3, beta: MultiIndex3, n: usize) -> f64 {
    let (x, w) = gauss_legendre(n);
    let third = [1.0 / 3.0; 3];
    let mut total = 0.0;
    for i in 0..3 {
        let mut vi = [0.0; 3];
        vi[i] = 1.0;
        for other in [(i + 1) % 3, (i + 2) % 3] {
            let mut mid = [0.0; 3];
            mid[i] = 0.5;
            mid[other] = 0.5;
            total += piece(alpha, beta, i, vi, mid, third, &x, &w);
        }
    }
    2.0 * total
}

/// Integral over the sub-triangle `[v_i, p, q]` in barycentric coordinates, collapsed at `v_i`.
#[allow(clippy::too_many_arguments)]
fn piece(
    alpha: MultiIndex3,
    beta: MultiIndex3,
    i: usize,
    vi: [f64; 3],
    p: [f64; 3],
    q: [f64; 3],
    x: &[f64],
    w: &[f64],
) -> f64 {
    let a = [p[0] - vi[0], p[1] - vi[1], p[2] - vi[2]];
    let b = [q[0] - p[0], q[1] - p[1], q[2] - p[2]];
    // area element in the reference (x, y) = (lambda_1, lambda_2) plane
    let det = (a[1] * b[2] - a[2] * b[1]).abs();
    let power = 1 + (0..3).filter(|&j| j != i).map(|j| alpha[j] as i32).sum::<i32>() - beta[i] as i32;
    assert!(power >= 0, "integrand is not integrable");
    let mut acc = 0.0;
    for (tu, wu) in x.iter().zip(w) {
        for (tt, wt) in x.iter().zip(w) {
            let u = *tu;
            let dir = [a[0] + tt * b[0], a[1] + tt * b[1], a[2] + tt * b[2]];
            let mut f = u.powi(power);
            for j in 0..3 {
                if j == i {
                    let lam = 1.0 + u * dir[j];
                    f *= lam.powi(alpha[j] as i32);
                    f /= (-dir[j]).powi(beta[j] as i32);
                } else {
                    f *= dir[j].powi(alpha[j] as i32);
                    let lam = u * dir[j];
                    f /= (1.0 - lam).powi(beta[j] as i32);
                }
            }
            acc += wu * wt * f;
        }
    }
    acc * det
}

/// All eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn jacobi_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| m[i][j] * m[i][j]).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// A shape-regular triangle: a perturbed equilateral triangle, randomly scaled, rotated and
/// translated, counterclockwise.
pub fn random_triangle<R: rand::Rng>(rng: &mut R) -> [[f64; 2]; 3] {
    let scale = rng.gen_range(0.25..2.0);
    let rot = rng.gen_range(0.0..std::f64::consts::TAU);
    let shift = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
    let h = 3f64.sqrt() / 2.0;
    let reference = [[0.0, 0.0], [1.0, 0.0], [0.5, h]];
    reference.map(|p| {
        let x = p[0] + rng.gen_range(-0.15..0.15);
        let y = p[1] + rng.gen_range(-0.15..0.15);
        let (s, c) = rot.sin_cos();
        [shift[0] + scale * (c * x - s * y), shift[1] + scale * (s * x + c * y)]
    })
}

/// Random interior point in barycentric coordinates.
pub fn random_barycentric<R: rand::Rng>(rng: &mut R) -> [f64; 3] {
    let (a, b): (f64, f64) = (rng.gen_range(0.01..0.98), rng.gen_range(0.01..0.98));
    let (a, b) = if a + b < 0.99 { (a, b) } else { (0.99 - a, 0.99 - b) };
    [1.0 - a - b, a, b]
}

/// `c0 + c1 x + c2 y + c3 x^2 + c4 x y + c5 y^2` with its gradient.
#[derive(Clone, Copy, Debug)]
pub struct Quadratic(pub [f64; 6]);

impl Quadratic {
    pub fn random<R: rand::Rng>(rng: &mut R) -> Self {
        Quadratic(std::array::from_fn(|_| rng.gen_range(-1.0..1.0)))
    }

    pub fn value(&self, p: [f64; 2]) -> f64 {
        let c = self.0;
        let [x, y] = p;
        c[0] + c[1] * x + c[2] * y + c[3] * x * x + c[4] * x * y + c[5] * y * y
    }

    pub fn grad(&self, p: [f64; 2]) -> [f64; 2] {
        let c = self.0;
        let [x, y] = p;
        [c[1] + 2.0 * c[3] * x + c[4] * y, c[2] + c[4] * x + 2.0 * c[5] * y]
    }
}
