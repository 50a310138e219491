/// Gauss-Legendre nodes and weights on `[0, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "at least one Gauss point is required");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Chebyshev-like initial guess for the i-th largest root on [-1, 1]
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = (1.0 - x) / 2.0;
        nodes[n - 1 - i] = (1.0 + x) / 2.0;
        weights[i] = w / 2.0;
        weights[n - 1 - i] = w / 2.0;
    }
    (nodes, weights)
}

/// Legendre polynomial `P_n(x)` and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Collapsed tensor Gauss rule on the reference triangle `conv{(0,0), (1,0), (0,1)}`.
///
/// The outer rule runs in `x` over `[0, 1]`, the inner rule in `y` over `[0, 1 - x]`.
/// Weights sum to the reference area `1/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussRule {
    pub order: usize,
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                points.push([x[i], (1.0 - x[i]) * x[j]]);
                weights.push(w[i] * w[j] * (1.0 - x[i]));
            }
        }
        GaussRule { order: n, points, weights }
    }

    /// Barycentric coordinates of the rule points.
    pub fn barycentric(&self) -> Vec<[f64; 3]> {
        self.points.iter().map(|&[x, y]| [1.0 - x - y, x, y]).collect()
    }

    /// Approximate mean over the reference triangle of a function given in barycentric coordinates.
    pub fn mean<F: FnMut(&[f64; 3]) -> f64>(&self, mut f: F) -> f64 {
        2.0 * self
            .barycentric()
            .iter()
            .zip(&self.weights)
            .map(|(l, w)| w * f(l))
            .sum::<f64>()
    }
}

/// Approximate integral of `f` over the triangle with vertices `tri`.
pub fn gauss_integrate<F: FnMut([f64; 2]) -> f64>(mut f: F, rule: &GaussRule, tri: &[[f64; 2]; 3]) -> f64 {
    let [p0, p1, p2] = *tri;
    let d1 = [p1[0] - p0[0], p1[1] - p0[1]];
    let d2 = [p2[0] - p0[0], p2[1] - p0[1]];
    let det = (d1[0] * d2[1] - d1[1] * d2[0]).abs();
    det * rule
        .points
        .iter()
        .zip(&rule.weights)
        .map(|(&[x, y], w)| w * f([p0[0] + d1[0] * x + d2[0] * y, p0[1] + d1[1] * x + d2[1] * y]))
        .sum::<f64>()
}
