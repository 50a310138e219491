//! Drivers for the eigenvalue quadrature study and the Stokes pressure-robustness study,
//! with CSV and SVG output. All output is a pure function of the configuration.

pub mod svg;

use std::fmt::{self, Write};
use std::str::FromStr;

use crate::fe::{map_elements, Execution, QuadratureMode, Variant};
use crate::guzman_neilan::{self as gn, GuzmanNeilanTables};
use crate::mesh::{dorfler_mark, grading_indicator_with, refine_bisect, refine_red, Triangulation};
use crate::solvers::EigenOptions;
use crate::zienkiewicz::{self as zk, ZienkiewiczTables};
use crate::Error;

pub use svg::{Axis, Plot, Series};

/// Velocity error of the Taylor-Hood method on the same problem, drawn as a reference line.
pub const TAYLOR_HOOD_REFERENCE: f64 = 4.410009e-05;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Domain {
    #[default]
    Square,
    LShape,
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Domain::Square => "square",
            Domain::LShape => "lshape",
        })
    }
}

impl FromStr for Domain {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "square" => Ok(Domain::Square),
            "lshape" => Ok(Domain::LShape),
            _ => Err(Error::Parse(format!("unknown domain {s:?}, expected square or lshape"))),
        }
    }
}

impl Domain {
    pub fn coarse_mesh(self) -> Triangulation {
        match self {
            Domain::Square => Triangulation::unit_square(),
            Domain::LShape => Triangulation::l_shape(),
        }
    }
}

/// How the mesh sequence of an eigenvalue study is produced.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Refinement {
    /// Red refinement, levels `1..=levels`.
    Uniform { levels: usize },
    /// Geometric grading towards the origin by bulk marking of `|mid T|^-2 |T|^area_power`.
    /// A mesh is kept whenever its dof count has grown by `growth` since the last kept one.
    /// At most `max_steps` marking and refinement steps are taken.
    Graded { theta: f64, growth: f64, area_power: f64, max_steps: usize },
}

/// Configuration of an eigenvalue quadrature study.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenStudy {
    pub domain: Domain,
    pub variant: Variant,
    pub refinement: Refinement,
    /// Meshes with more dofs than this are not solved.
    pub max_ndof: usize,
    /// Gauss orders compared against exact quadrature.
    pub orders: Vec<usize>,
    pub tol: f64,
    pub exec: Execution,
}

impl EigenStudy {
    /// Uniformly refined unit square.
    pub fn square() -> Self {
        EigenStudy {
            domain: Domain::Square,
            variant: Variant::Full,
            refinement: Refinement::Uniform { levels: 7 },
            max_ndof: 100_000,
            orders: (2..=11).collect(),
            tol: 1e-11,
            exec: Execution::Parallel,
        }
    }

    /// Graded L-shaped domain.
    pub fn lshape() -> Self {
        EigenStudy {
            domain: Domain::LShape,
            refinement: Refinement::Graded { theta: 0.5, growth: 1.5, area_power: 1.4, max_steps: 10_000 },
            max_ndof: 100_000,
            ..Self::square()
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.orders.iter().any(|&n| !(1..=64).contains(&n)) {
            return Err(Error::Parse("Gauss orders must lie in 1..=64".into()));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::Parse("eigenvalue tolerance must be positive".into()));
        }
        match self.refinement {
            Refinement::Graded { theta, growth, area_power, .. }
                if !(theta > 0.0 && theta <= 1.0 && growth > 1.0 && area_power > 1.0) =>
            {
                Err(Error::Parse("need 0 < theta <= 1, growth > 1 and area power > 1".into()))
            }
            Refinement::Uniform { levels: 0 } => Err(Error::Parse("need at least one level".into())),
            _ => Ok(()),
        }
    }

    pub fn header(&self) -> Vec<(String, String)> {
        let mut h = vec![
            ("domain".to_string(), self.domain.to_string()),
            ("variant".into(), self.variant.to_string()),
        ];
        match self.refinement {
            Refinement::Uniform { levels } => {
                h.push(("refinement".into(), "uniform".into()));
                h.push(("levels".into(), levels.to_string()));
            }
            Refinement::Graded { theta, growth, area_power, max_steps } => {
                h.push(("refinement".into(), "graded".into()));
                h.push(("max_steps".into(), max_steps.to_string()));
                h.push(("theta".into(), theta.to_string()));
                h.push(("growth".into(), growth.to_string()));
                h.push(("area_power".into(), area_power.to_string()));
            }
        }
        h.push(("max_ndof".into(), self.max_ndof.to_string()));
        h.push(("orders".into(), join(&self.orders)));
        h.push(("tol".into(), format!("{:e}", self.tol)));
        h
    }

    /// The meshes of the study with their level numbers.
    pub fn meshes(&self) -> Vec<(usize, Triangulation)> {
        let ndof = |m: &Triangulation| zk::dof_map(m, self.variant).ndof;
        let mut out = Vec::new();
        let mut mesh = self.domain.coarse_mesh();
        match self.refinement {
            Refinement::Uniform { levels } => {
                for level in 1..=levels {
                    mesh = refine_red(&mesh);
                    if ndof(&mesh) > self.max_ndof {
                        break;
                    }
                    out.push((level, mesh.clone()));
                }
            }
            Refinement::Graded { theta, growth, area_power, max_steps } => {
                let mut last = 0.0;
                for level in 0..=max_steps {
                    let n = ndof(&mesh);
                    if n > self.max_ndof {
                        break;
                    }
                    if n as f64 >= growth * last {
                        out.push((level, mesh.clone()));
                        last = n as f64;
                    }
                    mesh = grade_step(&mesh, theta, area_power);
                }
            }
        }
        out
    }
}

/// One AFEM grading step: bulk-mark the indicator, bisect the refinement edges of the marked
/// elements, close.
pub fn grade_step(mesh: &Triangulation, theta: f64, area_power: f64) -> Triangulation {
    let marked = dorfler_mark(&grading_indicator_with(mesh, area_power), theta);
    let mut edges = vec![false; mesh.num_edges()];
    for e in marked {
        edges[mesh.element_edges()[e][0]] = true;
    }
    refine_bisect(mesh, &edges)
}

/// `n = None` marks the exact-quadrature row.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenRow {
    pub n: Option<usize>,
    pub level: usize,
    pub ndof: usize,
    pub lambda: f64,
    pub lambda_bar: f64,
    pub rel_gap: f64,
}

/// Smallest clamped-plate eigenvalue on `mesh` with the given tables.
pub fn plate_eigenvalue(
    mesh: &Triangulation,
    tables: &ZienkiewiczTables,
    variant: Variant,
    tol: f64,
    exec: Execution,
) -> Result<(usize, f64), Error> {
    let sys = zk::assemble_biharmonic(mesh, tables, None, variant, exec)?;
    let (lambda, _) = zk::solve_biharmonic_eigen(&sys, EigenOptions { tol, max_iter: 2000 })?;
    Ok((sys.dofs.ndof, lambda))
}

/// Exact and inexact eigenvalues on every mesh of the study.
pub fn run_eigen_study(cfg: &EigenStudy) -> Result<Vec<EigenRow>, Error> {
    cfg.validate()?;
    let exact = ZienkiewiczTables::new(QuadratureMode::Exact, 2)?;
    let gauss = cfg
        .orders
        .iter()
        .map(|&n| ZienkiewiczTables::new(QuadratureMode::Gauss(n), 2))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::new();
    for (level, mesh) in cfg.meshes() {
        // coarse meshes may have every dof clamped
        let (ndof, lambda) = match plate_eigenvalue(&mesh, &exact, cfg.variant, cfg.tol, cfg.exec) {
            Err(Error::NoFreeDofs) => continue,
            r => r?,
        };
        rows.push(EigenRow { n: None, level, ndof, lambda, lambda_bar: lambda, rel_gap: 0.0 });
        let bars = map_elements(cfg.exec, gauss.len(), |k| {
            plate_eigenvalue(&mesh, &gauss[k], cfg.variant, cfg.tol, Execution::Sequential)
        });
        for (&n, bar) in cfg.orders.iter().zip(bars) {
            let (_, lambda_bar) = bar?;
            let rel_gap = (lambda - lambda_bar).abs() / lambda;
            rows.push(EigenRow { n: Some(n), level, ndof, lambda, lambda_bar, rel_gap });
        }
    }
    Ok(rows)
}

/// Configuration of the Stokes study on the uniformly refined unit square.
#[derive(Clone, Debug, PartialEq)]
pub struct StokesStudy {
    /// Number of triangles, `2 * 4^k`.
    pub elements: usize,
    pub variant: Variant,
    pub orders: Vec<usize>,
    /// Lagrange degree used to interpolate the body force.
    pub rhs_degree: u32,
    pub exec: Execution,
}

impl Default for StokesStudy {
    fn default() -> Self {
        StokesStudy {
            elements: 8192,
            variant: Variant::Reduced,
            orders: (1..=16).collect(),
            rhs_degree: 1,
            exec: Execution::Parallel,
        }
    }
}

impl StokesStudy {
    pub fn validate(&self) -> Result<(), Error> {
        self.levels()?;
        if self.orders.iter().any(|&n| !(1..=64).contains(&n)) {
            return Err(Error::Parse("Gauss orders must lie in 1..=64".into()));
        }
        if self.rhs_degree == 0 {
            return Err(Error::Parse("load interpolation degree must be positive".into()));
        }
        Ok(())
    }

    fn levels(&self) -> Result<usize, Error> {
        (0..12)
            .find(|&k| 2 * 4usize.pow(k as u32) == self.elements)
            .ok_or_else(|| Error::Parse(format!("element count {} is not 2 * 4^k", self.elements)))
    }

    pub fn mesh(&self) -> Result<Triangulation, Error> {
        let mut m = Triangulation::unit_square();
        for _ in 0..self.levels()? {
            m = refine_red(&m);
        }
        Ok(m)
    }

    pub fn header(&self) -> Vec<(String, String)> {
        vec![
            ("domain".to_string(), "square".to_string()),
            ("elements".into(), self.elements.to_string()),
            ("variant".into(), self.variant.to_string()),
            ("orders".into(), join(&self.orders)),
            ("rhs_degree".into(), self.rhs_degree.to_string()),
            ("force".into(), "(0, 100(3y^2 - y + 1))".into()),
            ("pressure".into(), "100(y^3 - y^2/2 + y - 7/12)".into()),
            ("taylor_hood_ref".into(), format!("{TAYLOR_HOOD_REFERENCE:e}")),
        ]
    }
}

/// `n = None` marks the exact-quadrature row.
#[derive(Clone, Debug, PartialEq)]
pub struct StokesRow {
    pub n: Option<usize>,
    pub grad_err: f64,
    pub div_err: f64,
    pub pressure_err: f64,
}

pub fn stokes_force(x: [f64; 2]) -> [f64; 2] {
    [0.0, 100.0 * (3.0 * x[1] * x[1] - x[1] + 1.0)]
}

pub fn stokes_pressure(x: [f64; 2]) -> f64 {
    let y = x[1];
    100.0 * (y * y * y - y * y / 2.0 + y - 7.0 / 12.0)
}

/// Errors of the discrete solutions for exact quadrature and each Gauss order. The exact
/// velocity is zero. Velocity errors are measured with the exactly integrated stiffness.
pub fn run_stokes_study(cfg: &StokesStudy) -> Result<Vec<StokesRow>, Error> {
    cfg.validate()?;
    let mesh = cfg.mesh()?;
    let exact = GuzmanNeilanTables::new(QuadratureMode::Exact, cfg.rhs_degree)?;
    let reference = gn::assemble_stokes(&mesh, &exact, &stokes_force, cfg.variant, cfg.exec)?;
    let row = |n: Option<usize>, sys: &gn::StokesSystem| -> Result<StokesRow, Error> {
        let sol = gn::solve_stokes(sys)?;
        Ok(StokesRow {
            n,
            grad_err: gn::energy_norm(&reference.stiffness, &sol.velocity),
            div_err: gn::divergence_norm(&reference, &sol.velocity),
            pressure_err: gn::pressure_error(&mesh, &sol.pressure, stokes_pressure),
        })
    };
    let mut rows = vec![row(None, &reference)?];
    let inexact = map_elements(cfg.exec, cfg.orders.len(), |k| -> Result<StokesRow, Error> {
        let n = cfg.orders[k];
        let tables = GuzmanNeilanTables::new(QuadratureMode::Gauss(n), cfg.rhs_degree)?;
        let sys = gn::assemble_stokes(&mesh, &tables, &stokes_force, cfg.variant, Execution::Sequential)?;
        row(Some(n), &sys)
    });
    for r in inexact {
        rows.push(r?);
    }
    Ok(rows)
}

fn join(v: &[usize]) -> String {
    v.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

fn order_label(n: Option<usize>) -> String {
    n.map_or_else(|| "exact".to_string(), |n| n.to_string())
}

/// Comment lines with the experiment name, version and configuration.
pub fn csv_header(experiment: &str, config: &[(String, String)]) -> String {
    let mut s = format!("# ratfem {} {experiment}\n", env!("CARGO_PKG_VERSION"));
    for (k, v) in config {
        let _ = writeln!(s, "# {k}={v}");
    }
    s
}

/// Columns `n,level,ndof,lambda,lambda_bar,rel_gap`.
pub fn eigen_csv(experiment: &str, cfg: &EigenStudy, rows: &[EigenRow]) -> String {
    let mut s = csv_header(experiment, &cfg.header());
    s.push_str("n,level,ndof,lambda,lambda_bar,rel_gap\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{:e},{:e},{:e}",
            order_label(r.n),
            r.level,
            r.ndof,
            r.lambda,
            r.lambda_bar,
            r.rel_gap
        );
    }
    s
}

/// Columns `n,grad_err,div_err,pressure_err`.
pub fn stokes_csv(experiment: &str, cfg: &StokesStudy, rows: &[StokesRow]) -> String {
    let mut s = csv_header(experiment, &cfg.header());
    s.push_str("n,grad_err,div_err,pressure_err\n");
    for r in rows {
        let _ = writeln!(s, "{},{:e},{:e},{:e}", order_label(r.n), r.grad_err, r.div_err, r.pressure_err);
    }
    s
}

/// Relative gaps against ndof for each Gauss order, with `ndof^-1/2` and `ndof^-1` guides.
pub fn eigen_plot(title: &str, rows: &[EigenRow]) -> Plot {
    let mut orders: Vec<usize> = rows.iter().filter_map(|r| r.n).collect();
    orders.sort_unstable();
    orders.dedup();
    let mut series: Vec<Series> = orders
        .iter()
        .map(|&n| {
            let pts = rows
                .iter()
                .filter(|r| r.n == Some(n) && r.rel_gap > 0.0)
                .map(|r| (r.ndof as f64, r.rel_gap))
                .collect();
            Series::new(format!("n={n}"), pts)
        })
        .filter(|s| !s.points.is_empty())
        .collect();
    let gaps: Vec<&EigenRow> = rows.iter().filter(|r| r.n.is_some() && r.rel_gap > 0.0).collect();
    if let (Some(first), Some(last)) = (gaps.iter().map(|r| r.ndof).min(), gaps.iter().map(|r| r.ndof).max()) {
        let top = gaps.iter().map(|r| r.rel_gap).fold(0.0, f64::max);
        let (a, b) = (first as f64, last as f64);
        series.push(Series::guide("O(ndof^-1/2)", vec![(a, top), (b, top * (a / b).sqrt())]));
        series.push(Series::guide("O(ndof^-1)", vec![(a, top), (b, top * a / b)]));
    }
    Plot {
        title: title.into(),
        x_label: "ndof".into(),
        y_label: "|lambda - lambda_bar| / lambda".into(),
        x_axis: Axis::Log,
        y_axis: Axis::Log,
        series,
    }
}

/// Velocity error against the Gauss order, with the Taylor-Hood reference line.
pub fn stokes_plot(title: &str, rows: &[StokesRow]) -> Plot {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.n.map(|n| (n as f64, r.grad_err)))
        .filter(|p| p.1 > 0.0)
        .collect();
    let (a, b) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let mut series = vec![Series::new("Gauss", pts)];
    if a.is_finite() {
        series.push(Series::guide("Taylor-Hood", vec![(a, TAYLOR_HOOD_REFERENCE), (b, TAYLOR_HOOD_REFERENCE)]));
    }
    Plot {
        title: title.into(),
        x_label: "n".into(),
        y_label: "|grad(u - u_h)|".into(),
        x_axis: Axis::Linear,
        y_axis: Axis::Log,
        series,
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0.ln(), b + p.1.ln()));
    let (mx, my) = (sx / n, sy / n);
    let (num, den) = points.iter().fold((0.0, 0.0), |(a, b), p| {
        let dx = p.0.ln() - mx;
        (a + dx * (p.1.ln() - my), b + dx * dx)
    });
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<_> = [1.0, 2.0, 4.0, 8.0].iter().map(|&x: &f64| (x, 3.0 * x.powf(-0.5))).collect();
        assert!((loglog_slope(&pts) + 0.5).abs() < 1e-12);
    }

    #[test]
    fn element_counts() {
        let cfg = StokesStudy { elements: 2048, ..Default::default() };
        assert_eq!(cfg.mesh().unwrap().num_elements(), 2048);
        assert!(StokesStudy { elements: 1000, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn pressure_has_zero_mean_and_matches_force() {
        let rule = crate::quadrature::GaussRule::new(4);
        let tri = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]];
        let other = [[0.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let m = crate::quadrature::gauss_integrate(stokes_pressure, &rule, &tri)
            + crate::quadrature::gauss_integrate(stokes_pressure, &rule, &other);
        assert!(m.abs() < 1e-12);
        let h = 1e-6;
        let y = 0.3;
        let d = (stokes_pressure([0.0, y + h]) - stokes_pressure([0.0, y - h])) / (2.0 * h);
        assert!((d - stokes_force([0.0, y])[1]).abs() < 1e-6);
    }

    #[test]
    fn graded_meshes_grow() {
        let cfg = EigenStudy { max_ndof: 2000, ..EigenStudy::lshape() };
        let meshes = cfg.meshes();
        assert!(meshes.len() >= 3);
        let nd: Vec<usize> = meshes.iter().map(|(_, m)| zk::dof_map(m, Variant::Full).ndof).collect();
        assert!(nd.windows(2).all(|w| w[1] as f64 >= 1.5 * w[0] as f64));
    }

    #[test]
    fn csv_header_has_no_timestamp() {
        let cfg = EigenStudy::square();
        let s = eigen_csv("exp1", &cfg, &[]);
        assert!(s.starts_with("# ratfem "));
        assert!(s.contains("# orders=2,3,4,5,6,7,8,9,10,11\n"));
        assert!(s.ends_with("n,level,ndof,lambda,lambda_bar,rel_gap\n"));
    }
}
