use super::Triangulation;
use crate::Error;

/// Affine data of one element.
#[derive(Clone, Debug, PartialEq)]
pub struct ElementGeometry {
    pub vertices: [[f64; 2]; 3],
    /// Jacobian of the map from the reference triangle, columns `v1 - v0` and `v2 - v0`.
    pub jacobian: [[f64; 2]; 2],
    pub det: f64,
    pub area: f64,
    /// Row `i` is the gradient of `lambda_i`.
    pub grad_lambda: [[f64; 2]; 3],
    /// Global unit normal of local edge `j`.
    pub normals: [[f64; 2]; 3],
    /// Global unit tangent of local edge `j`, the normal rotated counterclockwise.
    pub tangents: [[f64; 2]; 3],
    /// `+1` where the global normal of local edge `j` points outward, else `-1`.
    pub orientation: [f64; 3],
}

impl ElementGeometry {
    pub fn new(mesh: &Triangulation, e: usize) -> Result<Self, Error> {
        let vertices = mesh.vertices(e);
        let [p0, p1, p2] = vertices;
        let jacobian = [[p1[0] - p0[0], p2[0] - p0[0]], [p1[1] - p0[1], p2[1] - p0[1]]];
        let det = jacobian[0][0] * jacobian[1][1] - jacobian[0][1] * jacobian[1][0];
        let h2 = [(p0, p1), (p1, p2), (p2, p0)]
            .iter()
            .map(|(a, b)| (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2))
            .fold(0.0, f64::max);
        if det.abs() <= 1e-14 * h2 {
            return Err(Error::DegenerateElement(e));
        }
        let inv = [
            [jacobian[1][1] / det, -jacobian[0][1] / det],
            [-jacobian[1][0] / det, jacobian[0][0] / det],
        ];
        // D(lambda) = [[-1,-1],[1,0],[0,1]] * inv
        let g1 = inv[0];
        let g2 = inv[1];
        let grad_lambda = [[-g1[0] - g2[0], -g1[1] - g2[1]], g1, g2];
        let mut normals = [[0.0; 2]; 3];
        let mut tangents = [[0.0; 2]; 3];
        let mut orientation = [0.0; 3];
        for j in 0..3 {
            let s = mesh.element_edges()[e][j];
            let n = mesh.edge_normal(s);
            normals[j] = n;
            tangents[j] = [-n[1], n[0]];
            // grad lambda_j points inward across edge j
            let g = grad_lambda[j];
            orientation[j] = if n[0] * g[0] + n[1] * g[1] < 0.0 { 1.0 } else { -1.0 };
        }
        Ok(ElementGeometry {
            vertices,
            jacobian,
            det,
            area: det.abs() / 2.0,
            grad_lambda,
            normals,
            tangents,
            orientation,
        })
    }

    /// The symmetric matrix `G G^T` with `G` the barycentric gradient matrix.
    pub fn gram(&self) -> [[f64; 3]; 3] {
        let g = &self.grad_lambda;
        let mut out = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = g[i][0] * g[j][0] + g[i][1] * g[j][1];
            }
        }
        out
    }

    /// Physical point for barycentric coordinates.
    pub fn point(&self, l: &[f64; 3]) -> [f64; 2] {
        let v = &self.vertices;
        [
            l[0] * v[0][0] + l[1] * v[1][0] + l[2] * v[2][0],
            l[0] * v[0][1] + l[1] * v[1][1] + l[2] * v[2][1],
        ]
    }

    /// Barycentric coordinates of a physical point.
    pub fn barycentric(&self, x: [f64; 2]) -> [f64; 3] {
        let g = &self.grad_lambda;
        let v0 = self.vertices[0];
        let d = [x[0] - v0[0], x[1] - v0[1]];
        let l1 = g[1][0] * d[0] + g[1][1] * d[1];
        let l2 = g[2][0] * d[0] + g[2][1] * d[1];
        [1.0 - l1 - l2, l1, l2]
    }

    /// Physical gradient from barycentric partial derivatives.
    pub fn gradient(&self, d: &[f64; 3]) -> [f64; 2] {
        let g = &self.grad_lambda;
        [
            d[0] * g[0][0] + d[1] * g[1][0] + d[2] * g[2][0],
            d[0] * g[0][1] + d[1] * g[1][1] + d[2] * g[2][1],
        ]
    }

    /// Physical Hessian from barycentric second partial derivatives.
    pub fn hessian(&self, h: &[[f64; 3]; 3]) -> [[f64; 2]; 2] {
        let g = &self.grad_lambda;
        let mut out = [[0.0; 2]; 2];
        for (a, row) in out.iter_mut().enumerate() {
            for (b, entry) in row.iter_mut().enumerate() {
                for i in 0..3 {
                    for j in 0..3 {
                        *entry += g[i][a] * h[i][j] * g[j][b];
                    }
                }
            }
        }
        out
    }
}
