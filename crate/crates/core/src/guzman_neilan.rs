//! Guzman-Neilan Stokes pair: piecewise linear velocities enriched by curls of the cubic and
//! rational bubble potentials of the Zienkiewicz element, with piecewise constant pressures.
//!
//! Curls are taken as `curl rho = R grad rho = (d_y rho, -d_x rho)`. Edge tangents are
//! `tau = R^T nu`.

use crate::fe::{
    assemble_matrix, assemble_vector, eval_exact, lagrange_basis, map_elements, rhs_moments, DofMap,
    Execution, Integrator, Matrix, QuadratureMode, Tensor, Variant, HESS_PAIRS,
};
use crate::mesh::{ElementGeometry, Triangulation};
use crate::quadrature::GaussRule;
use crate::ratfun::{BaryPoint, RatCombo};
use crate::solvers::{sym_indef_solve, SparseMatrix};
use crate::zienkiewicz::{potentials, BasisEvaluator};
use crate::Error;

/// Local velocity dimension of the full element.
pub const NLOC: usize = 12;
const NPOT: usize = 6;

/// Ordered index pairs `(i, j)` behind a compressed Hessian pair.
fn ordered(p: usize) -> Vec<(usize, usize)> {
    let (i, j) = HESS_PAIRS[p];
    if i == j {
        vec![(i, i)]
    } else {
        vec![(i, j), (j, i)]
    }
}

fn expand(h: &[f64]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for (p, &v) in h.iter().enumerate() {
        for (i, j) in ordered(p) {
            out[i][j] = v;
        }
    }
    out
}

/// `R G^T` as a `2 x 3` array.
fn rot_grad(geom: &ElementGeometry) -> [[f64; 3]; 2] {
    let g = &geom.grad_lambda;
    [[g[0][1], g[1][1], g[2][1]], [-g[0][0], -g[1][0], -g[2][0]]]
}

fn curl(geom: &ElementGeometry, d: [f64; 3]) -> [f64; 2] {
    let g = geom.gradient(&d);
    [g[1], -g[0]]
}

/// Reference tables of the element family.
#[derive(Clone, Debug)]
pub struct GuzmanNeilanTables {
    pub mode: QuadratureMode,
    /// `rhat[r][s][p][q]`: mean of `d_p rho_r * d_q rho_s` over [`HESS_PAIRS`].
    pub rhat: Tensor,
    /// `hbar[s][p]`: mean of `d_p rho_s`.
    pub hbar: Matrix,
    /// Barycentric gradients of the potentials at the vertices, `[3, 6, 3]`.
    pub grad_vertex: Tensor,
    /// Barycentric gradients of the potentials at the edge midpoints, `[3, 6, 3]`.
    pub grad_mid: Tensor,
    /// `mean(phi_j lambda_i)`, `L x 3`.
    pub rhs_linear: Matrix,
    /// `mean(phi_j d_k rho_s)`, `[L, 3, 6]`.
    pub rhs_curl: Tensor,
    pub rhs_degree: u32,
    pub rhs_nodes: Vec<[f64; 3]>,
}

impl GuzmanNeilanTables {
    pub fn new(mode: QuadratureMode, rhs_degree: u32) -> Result<Self, Error> {
        let rho = potentials();
        let mut integ = Integrator::new(mode);
        let hess: Vec<Vec<RatCombo>> = rho
            .iter()
            .map(|f| {
                let h = f.hessian_lambda();
                HESS_PAIRS.iter().map(|&(i, j)| h[i][j].clone()).collect()
            })
            .collect();
        let rhat = integ.moment_tensor(&hess, &hess, true)?;
        let mut hbar = Matrix::zeros(NPOT, 6);
        for (s, h) in hess.iter().enumerate() {
            for (p, hp) in h.iter().enumerate() {
                hbar[(s, p)] = integ.mean(hp)?;
            }
        }
        let lambdas = [0, 1, 2].map(RatCombo::lambda);
        let rhs_linear = rhs_moments(rhs_degree, &lambdas, &mut integ)?;
        let grads: Vec<[RatCombo; 3]> = rho.iter().map(RatCombo::grad_lambda).collect();
        let nl = rhs_linear.rows();
        let mut rhs_curl = Tensor::zeros(&[nl, 3, NPOT]);
        for k in 0..3 {
            let dk: Vec<RatCombo> = grads.iter().map(|g| g[k].clone()).collect();
            let m = rhs_moments(rhs_degree, &dk, &mut integ)?;
            for j in 0..nl {
                for s in 0..NPOT {
                    rhs_curl.set(&[j, k, s], m[(j, s)]);
                }
            }
        }
        let mut grad_vertex = Tensor::zeros(&[3, NPOT, 3]);
        let mut grad_mid = Tensor::zeros(&[3, NPOT, 3]);
        for (s, g) in grads.iter().enumerate() {
            for i in 0..3 {
                for (k, gk) in g.iter().enumerate() {
                    grad_vertex.set(&[i, s, k], eval_exact(gk, &BaryPoint::vertex(i))?);
                    grad_mid.set(&[i, s, k], eval_exact(gk, &BaryPoint::edge_midpoint(i))?);
                }
            }
        }
        let rhs_nodes = lagrange_basis(rhs_degree).iter().map(|(_, p)| p.to_f64()).collect();
        Ok(GuzmanNeilanTables {
            mode,
            rhat,
            hbar,
            grad_vertex,
            grad_mid,
            rhs_linear,
            rhs_curl,
            rhs_degree,
            rhs_nodes,
        })
    }

    /// Named tables for export.
    pub fn named_tensors(&self) -> Vec<(&'static str, Tensor)> {
        vec![
            ("guzman_neilan_rhat", self.rhat.clone()),
            ("guzman_neilan_hbar", Tensor::from(&self.hbar)),
            ("guzman_neilan_grad_vertex", self.grad_vertex.clone()),
            ("guzman_neilan_grad_mid", self.grad_mid.clone()),
            ("guzman_neilan_rhs_linear", Tensor::from(&self.rhs_linear)),
            ("guzman_neilan_rhs_curl", self.rhs_curl.clone()),
        ]
    }

    fn rho_grad(&self, t: &Tensor, i: usize, s: usize) -> [f64; 3] {
        [0, 1, 2].map(|k| t.get(&[i, s, k]))
    }
}

/// Element matrix `(grad b_r, grad b_s)` with blocks `[P M; M^T R]`.
pub fn local_stiffness(geom: &ElementGeometry, tables: &GuzmanNeilanTables) -> Matrix {
    let gram = geom.gram();
    let rg = rot_grad(geom);
    let mut a = Matrix::zeros(NLOC, NLOC);
    // P: linear velocities
    for c in 0..2 {
        for i in 0..3 {
            for j in 0..3 {
                a[(3 * c + i, 3 * c + j)] = geom.area * gram[i][j];
            }
        }
    }
    // M: linear against curls
    for s in 0..NPOT {
        let h = expand(tables.hbar.row(s));
        for c in 0..2 {
            for i in 0..3 {
                let mut v = 0.0;
                for (k, hk) in h.iter().enumerate() {
                    for (l, hkl) in hk.iter().enumerate() {
                        v += hkl * gram[i][l] * rg[c][k];
                    }
                }
                a[(3 * c + i, 6 + s)] = geom.area * v;
                a[(6 + s, 3 * c + i)] = geom.area * v;
            }
        }
    }
    // R: tr(H_r M H_s M) in compressed pairs
    let mut q = [[0.0; 6]; 6];
    for (p, qp) in q.iter_mut().enumerate() {
        for (pq, w) in qp.iter_mut().enumerate() {
            for (i, j) in ordered(p) {
                for (k, l) in ordered(pq) {
                    *w += gram[j][k] * gram[l][i];
                }
            }
        }
    }
    for r in 0..NPOT {
        for s in r..NPOT {
            let mut v = 0.0;
            for (p, qp) in q.iter().enumerate() {
                for (pq, w) in qp.iter().enumerate() {
                    v += tables.rhat.get(&[r, s, p, pq]) * w;
                }
            }
            a[(6 + r, 6 + s)] = geom.area * v;
            a[(6 + s, 6 + r)] = geom.area * v;
        }
    }
    a
}

/// `int_T div b_r`: the divergence of the linear part, zero for the curls.
pub fn local_divergence(geom: &ElementGeometry) -> Vec<f64> {
    let g = &geom.grad_lambda;
    let mut b = vec![0.0; NLOC];
    for i in 0..3 {
        b[i] = geom.area * g[i][0];
        b[3 + i] = geom.area * g[i][1];
    }
    b
}

/// `int_T f . b_r` with `f` replaced by its Lagrange interpolant, given nodal values.
pub fn local_load(geom: &ElementGeometry, tables: &GuzmanNeilanTables, fvals: &[[f64; 2]]) -> Vec<f64> {
    let rg = rot_grad(geom);
    let mut b = vec![0.0; NLOC];
    for (j, f) in fvals.iter().enumerate() {
        for i in 0..3 {
            let m = tables.rhs_linear[(j, i)];
            b[i] += f[0] * m;
            b[3 + i] += f[1] * m;
        }
        for s in 0..NPOT {
            let mut v = 0.0;
            for k in 0..3 {
                v += (f[0] * rg[0][k] + f[1] * rg[1][k]) * tables.rhs_curl.get(&[j, k, s]);
            }
            b[6 + s] += v;
        }
    }
    b.iter_mut().for_each(|x| *x *= geom.area);
    b
}

/// Degrees of freedom applied to the local basis: x-values at vertices, y-values at vertices,
/// normal and tangential components at the edge midpoints.
pub fn local_vandermonde(geom: &ElementGeometry, tables: &GuzmanNeilanTables) -> Matrix {
    let mut v = Matrix::zeros(NLOC, NLOC);
    for k in 0..6 {
        v[(k, k)] = 1.0;
    }
    for j in 0..3 {
        let (n, t) = (geom.normals[j], geom.tangents[j]);
        for i in 0..3 {
            if i != j {
                // lambda_i is 1/2 at the midpoint of the edge opposite v_j
                v[(6 + j, i)] = 0.5 * n[0];
                v[(6 + j, 3 + i)] = 0.5 * n[1];
                v[(9 + j, i)] = 0.5 * t[0];
                v[(9 + j, 3 + i)] = 0.5 * t[1];
            }
        }
    }
    for s in 0..NPOT {
        for i in 0..3 {
            let u = curl(geom, tables.rho_grad(&tables.grad_vertex, i, s));
            v[(i, 6 + s)] = u[0];
            v[(3 + i, 6 + s)] = u[1];
            let u = curl(geom, tables.rho_grad(&tables.grad_mid, i, s));
            let (n, t) = (geom.normals[i], geom.tangents[i]);
            v[(6 + i, 6 + s)] = u[0] * n[0] + u[1] * n[1];
            v[(9 + i, 6 + s)] = u[0] * t[0] + u[1] * t[1];
        }
    }
    v
}

/// Coefficients `gamma[j][k - 6]` that make the tangential trace of `b_k`, `k = 6..9`, affine
/// on every edge after subtracting `sum_j gamma[j][k] b_{9 + j}`.
pub fn reduction_coefficients(v: &Matrix, geom: &ElementGeometry) -> Result<[[f64; 3]; 3], Error> {
    let mut gamma = [[0.0; 3]; 3];
    for j in 0..3 {
        let d = v[(9 + j, 9 + j)];
        if d.abs() <= 1e-14 * v.max_abs() {
            return Err(Error::ZeroBubbleTangentialTrace);
        }
        let t = geom.tangents[j];
        let (a, b) = ((j + 1) % 3, (j + 2) % 3);
        for k in 6..9 {
            let mean = 0.5 * (t[0] * (v[(a, k)] + v[(b, k)]) + t[1] * (v[(3 + a, k)] + v[(3 + b, k)]));
            gamma[j][k - 6] = (v[(9 + j, k)] - mean) / d;
        }
    }
    Ok(gamma)
}

/// Coefficients of the nodal basis in terms of `b_1..b_12`.
pub fn element_coefficients(
    geom: &ElementGeometry,
    tables: &GuzmanNeilanTables,
    variant: Variant,
) -> Result<Matrix, Error> {
    let v = local_vandermonde(geom, tables);
    match variant {
        Variant::Full => v.inverse(),
        Variant::Reduced => {
            let gamma = reduction_coefficients(&v, geom)?;
            let mut red = Matrix::zeros(NLOC, 9);
            for k in 0..9 {
                red[(k, k)] = 1.0;
            }
            for j in 0..3 {
                for k in 6..9 {
                    red[(9 + j, k)] = -gamma[j][k - 6];
                }
            }
            let inv = v.block(0, 9, 0, 9).inverse()?;
            Ok(&red * &inv)
        }
    }
}

/// Global velocity numbering: x-values, y-values at nodes, normal components on edges, then
/// tangential components on edges (full variant only). Boundary nodes and edges are fixed.
pub fn dof_map(mesh: &Triangulation, variant: Variant) -> DofMap {
    let (m, ne) = (mesh.num_nodes(), mesh.num_edges());
    let ndof = match variant {
        Variant::Full => 2 * m + 2 * ne,
        Variant::Reduced => 2 * m + ne,
    };
    let element_dofs = mesh
        .elements()
        .iter()
        .zip(mesh.element_edges())
        .map(|(n, s)| {
            let mut d: Vec<usize> = n.to_vec();
            d.extend(n.iter().map(|v| m + v));
            d.extend(s.iter().map(|e| 2 * m + e));
            if variant == Variant::Full {
                d.extend(s.iter().map(|e| 2 * m + ne + e));
            }
            d
        })
        .collect();
    let mut dofs = DofMap::new(element_dofs, ndof);
    for (v, &b) in mesh.boundary_nodes().iter().enumerate() {
        if b {
            dofs.fixed[v] = true;
            dofs.fixed[m + v] = true;
        }
    }
    for (s, &b) in mesh.boundary_edges().iter().enumerate() {
        if b {
            dofs.fixed[2 * m + s] = true;
            if variant == Variant::Full {
                dofs.fixed[2 * m + ne + s] = true;
            }
        }
    }
    dofs
}

/// Global Stokes matrices before constraints and gauge are applied.
#[derive(Clone, Debug)]
pub struct StokesSystem {
    /// Velocity stiffness.
    pub stiffness: SparseMatrix,
    /// `div[i][t] = int_{T_t} div phi_i`, velocity dofs by elements.
    pub div: SparseMatrix,
    pub load: Vec<f64>,
    pub dofs: DofMap,
    pub areas: Vec<f64>,
}

/// Assemble the Stokes system for the body force `f`.
pub fn assemble_stokes(
    mesh: &Triangulation,
    tables: &GuzmanNeilanTables,
    f: &(dyn Fn([f64; 2]) -> [f64; 2] + Sync),
    variant: Variant,
    exec: Execution,
) -> Result<StokesSystem, Error> {
    let dofs = dof_map(mesh, variant);
    let locals = map_elements(exec, mesh.num_elements(), |e| -> Result<_, Error> {
        let geom = mesh.geometry(e)?;
        let c = element_coefficients(&geom, tables, variant)?;
        let ct = c.transpose();
        let a = c.congruence(&local_stiffness(&geom, tables));
        let d = ct.mul_vec(&local_divergence(&geom));
        let fv: Vec<[f64; 2]> = tables.rhs_nodes.iter().map(|l| f(geom.point(l))).collect();
        let b = ct.mul_vec(&local_load(&geom, tables, &fv));
        Ok((a, d, b, geom.area))
    });
    let mut a_loc = Vec::with_capacity(locals.len());
    let mut b_loc = Vec::with_capacity(locals.len());
    let mut trip = Vec::new();
    let mut areas = Vec::with_capacity(locals.len());
    for (e, l) in locals.into_iter().enumerate() {
        let (a, d, b, area) = l?;
        for (&gi, &v) in dofs.element_dofs[e].iter().zip(&d) {
            trip.push((gi, e, v));
        }
        a_loc.push(a);
        b_loc.push(b);
        areas.push(area);
    }
    Ok(StokesSystem {
        stiffness: assemble_matrix(&dofs, &a_loc)?,
        div: SparseMatrix::from_triplets(dofs.ndof, mesh.num_elements(), trip),
        load: assemble_vector(&dofs, &b_loc)?,
        dofs,
        areas,
    })
}

/// Velocity coefficients (full length, zero on fixed dofs) and elementwise pressures with
/// zero mean.
#[derive(Clone, Debug, PartialEq)]
pub struct StokesSolution {
    pub velocity: Vec<f64>,
    pub pressure: Vec<f64>,
}

/// Solve `[A B; B^T 0] [u; -p] = [f; 0]` on the free velocity dofs with the pressure of
/// element 0 pinned, then shift the pressure to zero mean.
pub fn solve_stokes(sys: &StokesSystem) -> Result<StokesSolution, Error> {
    let free = sys.dofs.free_dofs();
    let nf = free.len();
    let np = sys.areas.len();
    if nf == 0 {
        return Err(Error::NoFreeDofs);
    }
    let mut index = vec![usize::MAX; sys.dofs.ndof];
    for (k, &i) in free.iter().enumerate() {
        index[i] = k;
    }
    let mut trip = Vec::new();
    for (k, &i) in free.iter().enumerate() {
        for (j, v) in sys.stiffness.row(i) {
            if index[j] != usize::MAX {
                trip.push((k, index[j], v));
            }
        }
        for (t, v) in sys.div.row(i) {
            if t > 0 {
                trip.push((k, nf + t - 1, v));
                trip.push((nf + t - 1, k, v));
            }
        }
    }
    let n = nf + np - 1;
    let k = SparseMatrix::from_triplets(n, n, trip);
    let mut rhs = vec![0.0; n];
    for (k, &i) in free.iter().enumerate() {
        rhs[k] = sys.load[i];
    }
    let x = sym_indef_solve(&k, &rhs)?;
    let mut velocity = vec![0.0; sys.dofs.ndof];
    for (k, &i) in free.iter().enumerate() {
        velocity[i] = x[k];
    }
    let mut pressure = vec![0.0; np];
    for t in 1..np {
        pressure[t] = -x[nf + t - 1];
    }
    let total: f64 = sys.areas.iter().sum();
    let mean = pressure.iter().zip(&sys.areas).map(|(p, a)| p * a).sum::<f64>() / total;
    pressure.iter_mut().for_each(|p| *p -= mean);
    Ok(StokesSolution { velocity, pressure })
}

/// `sqrt(u^T A u)` for an assembled stiffness `A`, the broken H1 seminorm of the velocity.
pub fn energy_norm(stiffness: &SparseMatrix, u: &[f64]) -> f64 {
    let au = stiffness.mul_vec(u);
    au.iter().zip(u).map(|(a, b)| a * b).sum::<f64>().max(0.0).sqrt()
}

/// L2 norm of the divergence. The divergence is constant on each element.
pub fn divergence_norm(sys: &StokesSystem, u: &[f64]) -> f64 {
    let d = sys.div.transpose().mul_vec(u);
    d.iter().zip(&sys.areas).map(|(v, a)| v * v / a).sum::<f64>().sqrt()
}

/// L2 distance between the elementwise constant pressure and a smooth function.
pub fn pressure_error(mesh: &Triangulation, pressure: &[f64], exact: impl Fn([f64; 2]) -> f64) -> f64 {
    let rule = GaussRule::new(4);
    let pts = rule.barycentric();
    let mut sum = 0.0;
    for (e, &p) in pressure.iter().enumerate() {
        let tri = mesh.vertices(e);
        let area = mesh.area(e);
        let mut k = 0;
        let mean = rule.mean(|_| {
            let l = &pts[k];
            k += 1;
            let x = [
                l[0] * tri[0][0] + l[1] * tri[1][0] + l[2] * tri[2][0],
                l[0] * tri[0][1] + l[1] * tri[1][1] + l[2] * tri[2][1],
            ];
            (exact(x) - p).powi(2)
        });
        sum += area * mean;
    }
    sum.sqrt()
}

/// Local dof values of a smooth vector field.
pub fn interpolate_local(
    geom: &ElementGeometry,
    mut f: impl FnMut([f64; 2]) -> [f64; 2],
    variant: Variant,
) -> Vec<f64> {
    let mut d = vec![0.0; NLOC];
    for i in 0..3 {
        let u = f(geom.vertices[i]);
        d[i] = u[0];
        d[3 + i] = u[1];
        let a = geom.vertices[(i + 1) % 3];
        let b = geom.vertices[(i + 2) % 3];
        let u = f([(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0]);
        let (n, t) = (geom.normals[i], geom.tangents[i]);
        d[6 + i] = u[0] * n[0] + u[1] * n[1];
        d[9 + i] = u[0] * t[0] + u[1] * t[1];
    }
    if variant == Variant::Reduced {
        d.truncate(9);
    }
    d
}

/// Velocity and its physical Jacobian `J[c][d] = d_d u_c` at barycentric point `l`, for
/// coefficients of `b_1..b_12`. `eval` must be built from [`potentials`].
pub fn evaluate_local(
    eval: &BasisEvaluator,
    geom: &ElementGeometry,
    coeffs: &[f64],
    l: &[f64; 3],
) -> Result<([f64; 2], [[f64; 2]; 2]), Error> {
    let g = &geom.grad_lambda;
    let mut u = [0.0; 2];
    let mut jac = [[0.0; 2]; 2];
    for c in 0..2 {
        for i in 0..3 {
            let a = coeffs[3 * c + i];
            u[c] += a * l[i];
            jac[c][0] += a * g[i][0];
            jac[c][1] += a * g[i][1];
        }
    }
    for (s, jet) in eval.eval(l)?.iter().enumerate() {
        let a = coeffs[6 + s];
        let v = curl(geom, jet.grad);
        let h = geom.hessian(&jet.hessian);
        u[0] += a * v[0];
        u[1] += a * v[1];
        jac[0][0] += a * h[1][0];
        jac[0][1] += a * h[1][1];
        jac[1][0] -= a * h[0][0];
        jac[1][1] -= a * h[0][1];
    }
    Ok((u, jac))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::OnceLock;

    fn tables() -> &'static GuzmanNeilanTables {
        static T: OnceLock<GuzmanNeilanTables> = OnceLock::new();
        T.get_or_init(|| GuzmanNeilanTables::new(QuadratureMode::Exact, 2).unwrap())
    }

    fn element() -> ElementGeometry {
        Triangulation::l_shape().geometry(2).unwrap()
    }

    #[test]
    fn curls_are_divergence_free() {
        let g = element();
        for rho in potentials() {
            let h = rho.hessian_lambda();
            let mut hs = [[RatCombo::zero(), RatCombo::zero()], [RatCombo::zero(), RatCombo::zero()]];
            for (a, row) in hs.iter_mut().enumerate() {
                for (b, entry) in row.iter_mut().enumerate() {
                    for i in 0..3 {
                        for j in 0..3 {
                            let w = crate::exact::f64_to_rational(g.grad_lambda[i][a] * g.grad_lambda[j][b]);
                            *entry = entry.add(&h[i][j].scale(&w));
                        }
                    }
                }
            }
            // div curl = d_x d_y - d_y d_x, collected symbolically in barycentric form
            let ij: Vec<_> = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).collect();
            let mut div = RatCombo::zero();
            for &(i, j) in &ij {
                let c = g.grad_lambda[i][1] * g.grad_lambda[j][0] - g.grad_lambda[i][0] * g.grad_lambda[j][1];
                div = div.add(&h[i][j].scale(&crate::exact::f64_to_rational(c)));
            }
            assert!(div.is_zero());
        }
    }

    #[test]
    fn divergence_rows_of_curls_vanish() {
        let b = local_divergence(&element());
        assert!(b[6..].iter().all(|&x| x == 0.0));
        assert!(b[..3].iter().sum::<f64>().abs() < 1e-15);
    }

    #[test]
    fn constants_in_stiffness_kernel() {
        let g = element();
        let a = local_stiffness(&g, tables());
        let c = element_coefficients(&g, tables(), Variant::Full).unwrap();
        let d = interpolate_local(&g, |_| [1.5, -0.5], Variant::Full);
        let r = a.mul_vec(&c.mul_vec(&d));
        assert!(r.iter().all(|x| x.abs() < 1e-10), "{r:?}");
    }

    #[test]
    fn stiffness_matches_pointwise_jacobian() {
        let g = element();
        let a = local_stiffness(&g, tables());
        let eval = BasisEvaluator::new(&potentials());
        let rule = GaussRule::new(24);
        for (r, s) in [(0, 7), (7, 7), (10, 10), (8, 11), (4, 9)] {
            let mut er = vec![0.0; NLOC];
            let mut es = vec![0.0; NLOC];
            er[r] = 1.0;
            es[s] = 1.0;
            let pts = rule.barycentric();
            let mut k = 0;
            let mean = rule.mean(|_| {
                let l = pts[k];
                k += 1;
                let (_, jr) = evaluate_local(&eval, &g, &er, &l).unwrap();
                let (_, js) = evaluate_local(&eval, &g, &es, &l).unwrap();
                (0..2).flat_map(|c| (0..2).map(move |d| (c, d))).map(|(c, d)| jr[c][d] * js[c][d]).sum()
            });
            let approx = g.area * mean;
            assert!((approx - a[(r, s)]).abs() < 1e-4 * (1.0 + a[(r, s)].abs()), "{r} {s}: {approx} {}", a[(r, s)]);
        }
    }

    #[test]
    fn vandermonde_is_nodal_for_linear_part() {
        let g = element();
        let v = local_vandermonde(&g, tables());
        assert_eq!(v[(0, 0)], 1.0);
        for r in 0..6 {
            for k in 9..12 {
                assert!(v[(r, k)].abs() < 1e-15);
            }
        }
    }

    #[test]
    fn reduced_tangential_trace_is_affine() {
        let g = element();
        let v = local_vandermonde(&g, tables());
        let c = element_coefficients(&g, tables(), Variant::Reduced).unwrap();
        let w = &v * &c;
        for col in 0..9 {
            for j in 0..3 {
                let t = g.tangents[j];
                let (a, b) = ((j + 1) % 3, (j + 2) % 3);
                let mean = 0.5 * (t[0] * (w[(a, col)] + w[(b, col)]) + t[1] * (w[(3 + a, col)] + w[(3 + b, col)]));
                assert!((w[(9 + j, col)] - mean).abs() < 1e-10);
            }
        }
    }
}
