//! Singular Zienkiewicz C1 element: quadratics, three antisymmetric cubics and three
//! rational edge bubbles, with vertex values, vertex gradients and edge-midpoint normal
//! derivatives as degrees of freedom.

use crate::fe::{
    assemble_matrix, assemble_vector, eval_exact, lagrange_basis, map_elements,
    rhs_moments, DofMap, Execution, Integrator, Matrix, QuadratureMode, Tensor, Variant, HESS_PAIRS,
};
use crate::mesh::{ElementGeometry, Triangulation};
use crate::ratfun::{BaryPoint, FloatTerm, MultiIndex3, RatCombo};
use crate::solvers::{gen_eig_smallest_with, EigenOptions, SparseMatrix};
use crate::Error;

/// Local dimension of the full element.
pub const NLOC: usize = 12;

/// The rational edge bubble attached to the edge opposite vertex `j`:
/// `lambda^((2,2,2) - e_j) / (1 - lambda)^((1,1,1) - e_j)`.
pub fn edge_bubble(j: usize) -> RatCombo {
    let mut a = [2, 2, 2];
    let mut b = [1, 1, 1];
    a[j] -= 1;
    b[j] -= 1;
    RatCombo::rational(MultiIndex3(a), MultiIndex3(b))
}

/// The antisymmetric cubic `lambda_i^2 lambda_k - lambda_i lambda_k^2` with `k = i + 1 mod 3`.
pub fn edge_cubic(i: usize) -> RatCombo {
    let k = (i + 1) % 3;
    let li = RatCombo::lambda(i);
    let lk = RatCombo::lambda(k);
    li.multiply(&li).multiply(&lk).sub(&li.multiply(&lk).multiply(&lk))
}

/// The six scalar functions beyond the quadratics: three cubics, then three bubbles.
pub fn potentials() -> [RatCombo; 6] {
    [edge_cubic(0), edge_cubic(1), edge_cubic(2), edge_bubble(0), edge_bubble(1), edge_bubble(2)]
}

/// Local basis `b_1..b_12` in barycentric form.
pub fn basis() -> [RatCombo; NLOC] {
    let l = |i| RatCombo::lambda(i);
    let [c0, c1, c2, f0, f1, f2] = potentials();
    [
        l(2).multiply(&l(2)),
        l(1).multiply(&l(2)),
        l(1).multiply(&l(1)),
        l(0).multiply(&l(2)),
        l(0).multiply(&l(1)),
        l(0).multiply(&l(0)),
        c0,
        c1,
        c2,
        f0,
        f1,
        f2,
    ]
}

/// Floating point form of the basis and its barycentric derivatives for pointwise evaluation.
#[derive(Clone, Debug)]
pub struct BasisEvaluator {
    values: Vec<Vec<FloatTerm>>,
    grads: Vec<[Vec<FloatTerm>; 3]>,
    hessians: Vec<[[Vec<FloatTerm>; 3]; 3]>,
}

/// Value, barycentric gradient and barycentric Hessian of one function at one point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PointJet {
    pub value: f64,
    pub grad: [f64; 3],
    pub hessian: [[f64; 3]; 3],
}

impl BasisEvaluator {
    pub fn new(functions: &[RatCombo]) -> Self {
        let values = functions.iter().map(RatCombo::float_terms).collect();
        let grads = functions.iter().map(|f| f.grad_lambda().map(|g| g.float_terms())).collect();
        let hessians = functions
            .iter()
            .map(|f| f.hessian_lambda().map(|row| row.map(|h| h.float_terms())))
            .collect();
        BasisEvaluator { values, grads, hessians }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn eval(&self, l: &[f64; 3]) -> Result<Vec<PointJet>, Error> {
        let sum = |terms: &[FloatTerm]| terms.iter().map(|t| t.eval(l)).sum::<Result<f64, Error>>();
        (0..self.len())
            .map(|k| {
                let mut jet = PointJet { value: sum(&self.values[k])?, ..Default::default() };
                for i in 0..3 {
                    jet.grad[i] = sum(&self.grads[k][i])?;
                    for j in 0..3 {
                        jet.hessian[i][j] = sum(&self.hessians[k][i][j])?;
                    }
                }
                Ok(jet)
            })
            .collect()
    }
}

/// Reference tables of the element family.
#[derive(Clone, Debug)]
pub struct ZienkiewiczTables {
    pub mode: QuadratureMode,
    /// `ahat[r][s][p][q]`: mean of `d_p b_r * d_q b_s` for second-derivative pairs `p, q`
    /// in [`HESS_PAIRS`] order.
    pub ahat: Tensor,
    /// Mean of `b_r b_s`.
    pub mass: Matrix,
    /// Values at the vertices, `3 x 12`.
    pub value_vertex: Matrix,
    /// Barycentric gradients at the vertices, `[3, 12, 3]`.
    pub grad_vertex: Tensor,
    /// Barycentric gradients at the edge midpoints, `[3, 12, 3]`.
    pub grad_mid: Tensor,
    /// Values at the centroid.
    pub value_centroid: Vec<f64>,
    /// Load moments `mean(phi_j b_l)` against the Lagrange basis of degree `rhs_degree`.
    pub rhs: Matrix,
    pub rhs_degree: u32,
    /// Lagrange nodes in barycentric coordinates.
    pub rhs_nodes: Vec<[f64; 3]>,
}

impl ZienkiewiczTables {
    pub fn new(mode: QuadratureMode, rhs_degree: u32) -> Result<Self, Error> {
        let b = basis();
        let mut integ = Integrator::new(mode);
        let hess: Vec<Vec<RatCombo>> = b
            .iter()
            .map(|f| {
                let h = f.hessian_lambda();
                HESS_PAIRS.iter().map(|&(i, j)| h[i][j].clone()).collect()
            })
            .collect();
        let ahat = integ.moment_tensor(&hess, &hess, true)?;
        let vals: Vec<Vec<RatCombo>> = b.iter().map(|f| vec![f.clone()]).collect();
        let m = integ.moment_tensor(&vals, &vals, true)?;
        let mass = Matrix::from_fn(NLOC, NLOC, |r, s| m.get(&[r, s, 0, 0]));
        let rhs = rhs_moments(rhs_degree, &b, &mut integ)?;
        let rhs_nodes = lagrange_basis(rhs_degree).iter().map(|(_, p)| p.to_f64()).collect();

        let mut value_vertex = Matrix::zeros(3, NLOC);
        let mut grad_vertex = Tensor::zeros(&[3, NLOC, 3]);
        let mut grad_mid = Tensor::zeros(&[3, NLOC, 3]);
        let mut value_centroid = vec![0.0; NLOC];
        for (k, f) in b.iter().enumerate() {
            let g = f.grad_lambda();
            value_centroid[k] = eval_exact(f, &BaryPoint::centroid())?;
            for i in 0..3 {
                value_vertex[(i, k)] = eval_exact(f, &BaryPoint::vertex(i))?;
                for (m, gm) in g.iter().enumerate() {
                    grad_vertex.set(&[i, k, m], eval_exact(gm, &BaryPoint::vertex(i))?);
                    grad_mid.set(&[i, k, m], eval_exact(gm, &BaryPoint::edge_midpoint(i))?);
                }
            }
        }
        Ok(ZienkiewiczTables {
            mode,
            ahat,
            mass,
            value_vertex,
            grad_vertex,
            grad_mid,
            value_centroid,
            rhs,
            rhs_degree,
            rhs_nodes,
        })
    }

    /// Named tables for export.
    pub fn named_tensors(&self) -> Vec<(&'static str, Tensor)> {
        let mut c = Tensor::zeros(&[NLOC]);
        for k in 0..NLOC {
            c.set(&[k], self.value_centroid[k]);
        }
        vec![
            ("zienkiewicz_ahat", self.ahat.clone()),
            ("zienkiewicz_mass", Tensor::from(&self.mass)),
            ("zienkiewicz_value_vertex", Tensor::from(&self.value_vertex)),
            ("zienkiewicz_grad_vertex", self.grad_vertex.clone()),
            ("zienkiewicz_grad_mid", self.grad_mid.clone()),
            ("zienkiewicz_value_centroid", c),
            ("zienkiewicz_rhs", Tensor::from(&self.rhs)),
        ]
    }

    /// The functional `6 p(c) - 2 sum p(v_j) + sum grad p(v_k) . (v_k - c)` on each basis
    /// function, `c` the centroid. It vanishes on cubic Hermite interpolants of `P2`.
    pub fn hermite_functional(&self) -> Vec<f64> {
        (0..NLOC)
            .map(|k| {
                let mut v = 6.0 * self.value_centroid[k];
                for i in 0..3 {
                    v -= 2.0 * self.value_vertex[(i, k)];
                    for m in 0..3 {
                        let dir = if m == i { 2.0 / 3.0 } else { -1.0 / 3.0 };
                        v += self.grad_vertex.get(&[i, k, m]) * dir;
                    }
                }
                v
            })
            .collect()
    }
}

fn phys_grad(geom: &ElementGeometry, d: [f64; 3]) -> [f64; 2] {
    geom.gradient(&d)
}

/// Element stiffness `(Delta b_r, Delta b_s)` in the local basis.
pub fn local_stiffness(geom: &ElementGeometry, tables: &ZienkiewiczTables) -> Matrix {
    let gram = geom.gram();
    let w: Vec<f64> = HESS_PAIRS
        .iter()
        .map(|&(i, j)| if i == j { gram[i][j] } else { 2.0 * gram[i][j] })
        .collect();
    let mut a = Matrix::zeros(NLOC, NLOC);
    for r in 0..NLOC {
        for s in r..NLOC {
            let mut v = 0.0;
            for p in 0..6 {
                for q in 0..6 {
                    v += tables.ahat.get(&[r, s, p, q]) * w[p] * w[q];
                }
            }
            a[(r, s)] = geom.area * v;
            a[(s, r)] = geom.area * v;
        }
    }
    a
}

/// Element mass matrix in the local basis.
pub fn local_mass(geom: &ElementGeometry, tables: &ZienkiewiczTables) -> Matrix {
    Matrix::from_fn(NLOC, NLOC, |r, s| geom.area * tables.mass[(r, s)])
}

/// Degrees of freedom applied to the local basis: rows are vertex values, x-derivatives,
/// y-derivatives and global-normal derivatives at the edge midpoints.
pub fn local_vandermonde(geom: &ElementGeometry, tables: &ZienkiewiczTables) -> Matrix {
    let mut v = Matrix::zeros(NLOC, NLOC);
    for k in 0..NLOC {
        for i in 0..3 {
            v[(i, k)] = tables.value_vertex[(i, k)];
            let g = phys_grad(geom, [0, 1, 2].map(|m| tables.grad_vertex.get(&[i, k, m])));
            v[(3 + i, k)] = g[0];
            v[(6 + i, k)] = g[1];
            let gm = phys_grad(geom, [0, 1, 2].map(|m| tables.grad_mid.get(&[i, k, m])));
            let n = geom.normals[i];
            v[(9 + i, k)] = gm[0] * n[0] + gm[1] * n[1];
        }
    }
    v
}

/// Correction coefficients `gamma[j][k - 6]` making the normal derivative of `b_k`, `k = 6..9`,
/// affine along every edge after subtracting `sum_j gamma[j][k] b_{9 + j}`.
pub fn reduction_coefficients(v: &Matrix, geom: &ElementGeometry) -> Result<[[f64; 3]; 3], Error> {
    let mut gamma = [[0.0; 3]; 3];
    for j in 0..3 {
        let d = v[(9 + j, 9 + j)];
        if d.abs() <= 1e-14 * v.max_abs() {
            return Err(Error::ZeroBubbleNormalDerivative);
        }
        let n = geom.normals[j];
        let (a, b) = ((j + 1) % 3, (j + 2) % 3);
        for k in 6..9 {
            let ga = [v[(3 + a, k)], v[(6 + a, k)]];
            let gb = [v[(3 + b, k)], v[(6 + b, k)]];
            let mean = 0.5 * (n[0] * (ga[0] + gb[0]) + n[1] * (ga[1] + gb[1]));
            gamma[j][k - 6] = (v[(9 + j, k)] - mean) / d;
        }
    }
    Ok(gamma)
}

/// Coefficients of the nodal basis in terms of `b_1..b_12`: `12 x 12` for the full element,
/// `12 x 9` for the reduced one.
pub fn element_coefficients(
    geom: &ElementGeometry,
    tables: &ZienkiewiczTables,
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

/// Global numbering: values, x-derivatives, y-derivatives at nodes, then edge normal
/// derivatives (full variant only). Constrained: all vertex dofs on the boundary and the
/// normal derivative on boundary edges.
pub fn dof_map(mesh: &Triangulation, variant: Variant) -> DofMap {
    let m = mesh.num_nodes();
    let ndof = match variant {
        Variant::Full => 3 * m + mesh.num_edges(),
        Variant::Reduced => 3 * m,
    };
    let element_dofs = mesh
        .elements()
        .iter()
        .zip(mesh.element_edges())
        .map(|(n, s)| {
            let mut d: Vec<usize> = n.to_vec();
            d.extend(n.iter().map(|v| m + v));
            d.extend(n.iter().map(|v| 2 * m + v));
            if variant == Variant::Full {
                d.extend(s.iter().map(|e| 3 * m + e));
            }
            d
        })
        .collect();
    let mut dofs = DofMap::new(element_dofs, ndof);
    for (v, &b) in mesh.boundary_nodes().iter().enumerate() {
        if b {
            for k in 0..3 {
                dofs.fixed[k * m + v] = true;
            }
        }
    }
    if variant == Variant::Full {
        for (s, &b) in mesh.boundary_edges().iter().enumerate() {
            if b {
                dofs.fixed[3 * m + s] = true;
            }
        }
    }
    dofs
}

/// Global biharmonic system before constraints are applied.
#[derive(Clone, Debug)]
pub struct BiharmonicSystem {
    pub stiffness: SparseMatrix,
    pub mass: SparseMatrix,
    pub load: Vec<f64>,
    pub dofs: DofMap,
}

/// Assemble stiffness, mass and (optionally) the load for a right-hand side `f`.
pub fn assemble_biharmonic(
    mesh: &Triangulation,
    tables: &ZienkiewiczTables,
    f: Option<&(dyn Fn([f64; 2]) -> f64 + Sync)>,
    variant: Variant,
    exec: Execution,
) -> Result<BiharmonicSystem, Error> {
    let dofs = dof_map(mesh, variant);
    let locals = map_elements(exec, mesh.num_elements(), |e| -> Result<_, Error> {
        let geom = mesh.geometry(e)?;
        let c = element_coefficients(&geom, tables, variant)?;
        let a = c.congruence(&local_stiffness(&geom, tables));
        let m = c.congruence(&local_mass(&geom, tables));
        let b = match f {
            Some(f) => {
                let fv: Vec<f64> = tables.rhs_nodes.iter().map(|l| f(geom.point(l))).collect();
                let moments = tables.rhs.transpose().mul_vec(&fv);
                c.transpose().mul_vec(&moments).into_iter().map(|x| geom.area * x).collect()
            }
            None => vec![0.0; c.cols()],
        };
        Ok((a, m, b))
    });
    let mut a_loc = Vec::with_capacity(locals.len());
    let mut m_loc = Vec::with_capacity(locals.len());
    let mut b_loc = Vec::with_capacity(locals.len());
    for l in locals {
        let (a, m, b) = l?;
        a_loc.push(a);
        m_loc.push(m);
        b_loc.push(b);
    }
    Ok(BiharmonicSystem {
        stiffness: assemble_matrix(&dofs, &a_loc)?,
        mass: assemble_matrix(&dofs, &m_loc)?,
        load: assemble_vector(&dofs, &b_loc)?,
        dofs,
    })
}

/// Smallest eigenpair of the clamped plate problem on the free dofs. The returned vector
/// has full length with zeros on constrained dofs.
pub fn solve_biharmonic_eigen(sys: &BiharmonicSystem, opts: EigenOptions) -> Result<(f64, Vec<f64>), Error> {
    let free = sys.dofs.free_dofs();
    let a = sys.stiffness.submatrix(&free, &free);
    let m = sys.mass.submatrix(&free, &free);
    let (lambda, x) = gen_eig_smallest_with(&a, &m, opts)?;
    let mut full = vec![0.0; sys.dofs.ndof];
    for (k, &i) in free.iter().enumerate() {
        full[i] = x[k];
    }
    Ok((lambda, full))
}

/// Solve the clamped plate source problem. Returns the full coefficient vector.
pub fn solve_biharmonic(sys: &BiharmonicSystem) -> Result<Vec<f64>, Error> {
    let free = sys.dofs.free_dofs();
    let a = sys.stiffness.submatrix(&free, &free);
    let b: Vec<f64> = free.iter().map(|&i| sys.load[i]).collect();
    let x = crate::solvers::spd_solve(&a, &b)?;
    let mut full = vec![0.0; sys.dofs.ndof];
    for (k, &i) in free.iter().enumerate() {
        full[i] = x[k];
    }
    Ok(full)
}

/// Local dof values of a smooth function given by its value and gradient.
pub fn interpolate_local(
    geom: &ElementGeometry,
    mut f: impl FnMut([f64; 2]) -> (f64, [f64; 2]),
    variant: Variant,
) -> Vec<f64> {
    let mut d = vec![0.0; 12];
    for i in 0..3 {
        let (v, g) = f(geom.vertices[i]);
        d[i] = v;
        d[3 + i] = g[0];
        d[6 + i] = g[1];
        let a = geom.vertices[(i + 1) % 3];
        let b = geom.vertices[(i + 2) % 3];
        let (_, gm) = f([(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0]);
        d[9 + i] = gm[0] * geom.normals[i][0] + gm[1] * geom.normals[i][1];
    }
    if variant == Variant::Reduced {
        d.truncate(9);
    }
    d
}

/// Value and physical gradient at barycentric point `l` of the local function with basis
/// coefficients `coeffs` (coefficients of `b_1..b_12`).
pub fn evaluate_local(
    eval: &BasisEvaluator,
    geom: &ElementGeometry,
    coeffs: &[f64],
    l: &[f64; 3],
) -> Result<(f64, [f64; 2]), Error> {
    let jets = eval.eval(l)?;
    let mut v = 0.0;
    let mut d = [0.0; 3];
    for (c, j) in coeffs.iter().zip(&jets) {
        v += c * j.value;
        for m in 0..3 {
            d[m] += c * j.grad[m];
        }
    }
    Ok((v, geom.gradient(&d)))
}
