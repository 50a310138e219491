use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ratfem::experiments::{
    self, eigen_csv, eigen_plot, run_eigen_study, run_stokes_study, stokes_csv, stokes_plot, Domain, EigenStudy,
    Refinement, StokesStudy, TAYLOR_HOOD_REFERENCE,
};
use ratfem::guzman_neilan::GuzmanNeilanTables;
use ratfem::mesh::{read_mesh, refine_red, write_mesh};
use ratfem::quadrature::{integral_mean, IntegralCache};
use ratfem::zienkiewicz::ZienkiewiczTables;
use ratfem::{Execution, ExactValue, MultiIndex3, QuadratureMode, Variant};

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] ratfem::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Core(ratfem::Error::Parse(_) | ratfem::Error::InvalidMesh(_) | ratfem::Error::Io(_)) => 2,
            CliError::Core(_) => 3,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Exact integration of rational barycentric functions and the experiments built on it.
#[derive(Parser)]
#[command(name = "ratfem", version)]
struct Cli {
    /// Run element loops on one thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact mean of lam^alpha / (1-lam)^beta over a triangle, or a table of them.
    Quad(QuadArgs),
    /// Smallest clamped-plate eigenvalue on a sequence of meshes.
    BiharmonicEig(EigArgs),
    /// Stokes problem with a gradient body force on the uniformly refined unit square.
    Stokes(StokesArgs),
    /// Eigenvalue gaps on the uniformly refined square.
    Exp1(Exp1Args),
    /// Eigenvalue gaps on the graded L-shaped domain.
    Exp2(Exp2Args),
    /// Velocity errors of the Stokes pair under Gauss quadrature.
    Exp3(Exp3Args),
    /// Write every reference table as CSV into a directory.
    DumpTables(DumpArgs),
    /// Write or read meshes in the text format.
    #[command(subcommand)]
    Mesh(MeshCommand),
}

#[derive(Args)]
struct QuadArgs {
    /// Numerator exponents, e.g. 1,2,2.
    #[arg(long, value_parser = parse_index, required_unless_present = "table")]
    alpha: Option<MultiIndex3>,
    /// Denominator exponents, e.g. 0,1,1.
    #[arg(long, value_parser = parse_index, default_value = "0,0,0")]
    beta: MultiIndex3,
    /// Tabulate all finite cases with entries up to `amax` and `bmax`.
    #[arg(long)]
    table: bool,
    #[arg(long, default_value_t = 3)]
    amax: u32,
    #[arg(long, default_value_t = 2)]
    bmax: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EigArgs {
    #[arg(long, default_value = "square")]
    domain: Domain,
    #[arg(long, default_value = "exact")]
    quadrature: QuadratureMode,
    /// Uniform refinements (square) or grading steps (lshape).
    #[arg(long, default_value_t = 4)]
    levels: usize,
    #[arg(long, default_value = "full")]
    variant: Variant,
    #[arg(long, default_value_t = 100_000)]
    max_ndof: usize,
    #[arg(long, default_value_t = 1e-11)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StokesArgs {
    #[arg(long, default_value = "square")]
    domain: Domain,
    /// Number of triangles, 2 * 4^k.
    #[arg(long, default_value_t = 8192)]
    elements: usize,
    #[arg(long, default_value = "exact")]
    quadrature: QuadratureMode,
    #[arg(long, default_value = "reduced")]
    variant: Variant,
    /// Lagrange degree of the body-force interpolation.
    #[arg(long, default_value_t = 1)]
    rhs_degree: u32,
    /// Print this Taylor-Hood reference error alongside the result.
    #[arg(long, num_args = 0..=1, default_missing_value = "4.410009e-05")]
    taylor_hood_ref: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StudyOutput {
    /// CSV output, stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// SVG plot output.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct Exp1Args {
    #[arg(long, default_value_t = 7)]
    levels: usize,
    #[arg(long, default_value_t = 100_000)]
    max_ndof: usize,
    /// Gauss orders, a list like 2,3,5 or a range like 2..11.
    #[arg(long, default_value = "2..11", value_parser = parse_orders)]
    orders: Orders,
    #[arg(long, default_value = "full")]
    variant: Variant,
    #[arg(long, default_value_t = 1e-11)]
    tol: f64,
    #[command(flatten)]
    output: StudyOutput,
}

#[derive(Args)]
struct Exp2Args {
    #[arg(long, default_value_t = 100_000)]
    max_ndof: usize,
    #[arg(long, default_value_t = 10_000)]
    max_steps: usize,
    /// Bulk parameter of the marking.
    #[arg(long, default_value_t = 0.5)]
    theta: f64,
    /// Dof growth factor between recorded meshes.
    #[arg(long, default_value_t = 1.5)]
    growth: f64,
    /// Exponent of the element area in the grading indicator.
    #[arg(long, default_value_t = 1.4)]
    area_power: f64,
    #[arg(long, default_value = "2..11", value_parser = parse_orders)]
    orders: Orders,
    #[arg(long, default_value = "full")]
    variant: Variant,
    #[arg(long, default_value_t = 1e-11)]
    tol: f64,
    #[command(flatten)]
    output: StudyOutput,
}

#[derive(Args)]
struct Exp3Args {
    #[arg(long, default_value_t = 8192)]
    elements: usize,
    #[arg(long, default_value = "1..16", value_parser = parse_orders)]
    orders: Orders,
    #[arg(long, default_value = "reduced")]
    variant: Variant,
    #[arg(long, default_value_t = 1)]
    rhs_degree: u32,
    #[command(flatten)]
    output: StudyOutput,
}

#[derive(Args)]
struct DumpArgs {
    dir: PathBuf,
    #[arg(long, default_value = "exact")]
    quadrature: QuadratureMode,
    #[arg(long, default_value_t = 2)]
    zienkiewicz_rhs_degree: u32,
    #[arg(long, default_value_t = 1)]
    guzman_neilan_rhs_degree: u32,
}

#[derive(Subcommand)]
enum MeshCommand {
    /// Write a coarse mesh after uniform refinement.
    Dump {
        #[arg(long, default_value = "square")]
        domain: Domain,
        #[arg(long, default_value_t = 0)]
        levels: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Read a mesh and print a summary.
    Load { file: PathBuf },
}

#[derive(Clone, Debug)]
struct Orders(Vec<usize>);

fn parse_orders(s: &str) -> std::result::Result<Orders, String> {
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("bad order {t:?}"));
    let v = match s.split_once("..") {
        Some((a, b)) => {
            let b = b.strip_prefix('=').unwrap_or(b);
            (parse(a)?..=parse(b)?).collect()
        }
        None => s.split(',').map(parse).collect::<std::result::Result<Vec<_>, _>>()?,
    };
    if v.is_empty() {
        return Err("empty order list".into());
    }
    Ok(Orders(v))
}

fn parse_index(s: &str) -> std::result::Result<MultiIndex3, String> {
    let v: Vec<u32> = s
        .split(',')
        .map(|t| t.trim().parse().map_err(|_| format!("bad exponent {t:?}")))
        .collect::<std::result::Result<_, _>>()?;
    match v[..] {
        [a, b, c] => Ok(MultiIndex3::new(a, b, c)),
        _ => Err("expected three comma-separated exponents".into()),
    }
}

fn emit(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, content).map_err(|source| CliError::Io { path: p.into(), source }),
        None => io::stdout()
            .write_all(content.as_bytes())
            .map_err(|source| CliError::Io { path: "<stdout>".into(), source }),
    }
}

fn quad(args: &QuadArgs) -> Result<()> {
    let mut cache = IntegralCache::new();
    if !args.table {
        let alpha = args.alpha.expect("required by clap");
        let v = integral_mean(alpha, args.beta, &mut cache);
        let float = v.to_f64().map_or_else(|_| "inf".to_string(), |x| format!("{x:e}"));
        return emit(args.out.as_deref(), &format!("{v}\n{float}\n"));
    }
    let config = [("amax".to_string(), args.amax.to_string()), ("bmax".to_string(), args.bmax.to_string())];
    let mut s = experiments::csv_header("quad-table", &config);
    s.push_str("a0,a1,a2,b0,b1,b2,q0_num,q0_den,q1_num,q1_den\n");
    let range = |m: u32| (0..=m).flat_map(move |a| (0..=m).flat_map(move |b| (0..=m).map(move |c| MultiIndex3::new(a, b, c))));
    for alpha in range(args.amax) {
        for beta in range(args.bmax) {
            if let ExactValue::Finite { rational, pi2 } = integral_mean(alpha, beta, &mut cache) {
                let [a0, a1, a2] = alpha.0;
                let [b0, b1, b2] = beta.0;
                s.push_str(&format!(
                    "{a0},{a1},{a2},{b0},{b1},{b2},{},{},{},{}\n",
                    rational.numer(),
                    rational.denom(),
                    pi2.numer(),
                    pi2.denom()
                ));
            }
        }
    }
    emit(args.out.as_deref(), &s)
}

fn biharmonic_eig(args: &EigArgs, exec: Execution) -> Result<()> {
    let refinement = match args.domain {
        Domain::Square => Refinement::Uniform { levels: args.levels },
        Domain::LShape => match EigenStudy::lshape().refinement {
            Refinement::Graded { theta, growth, area_power, .. } => {
                Refinement::Graded { theta, growth, area_power, max_steps: args.levels }
            }
            r => r,
        },
    };
    let orders = match args.quadrature {
        QuadratureMode::Exact => vec![],
        QuadratureMode::Gauss(n) => vec![n],
    };
    let cfg = EigenStudy {
        domain: args.domain,
        variant: args.variant,
        refinement,
        max_ndof: args.max_ndof,
        orders,
        tol: args.tol,
        exec,
    };
    let rows = run_eigen_study(&cfg)?;
    let mut header = cfg.header();
    header.push(("quadrature".into(), args.quadrature.to_string()));
    let mut s = experiments::csv_header("biharmonic-eig", &header);
    match args.quadrature {
        QuadratureMode::Exact => {
            s.push_str("level,ndof,lambda\n");
            for r in rows.iter().filter(|r| r.n.is_none()) {
                s.push_str(&format!("{},{},{:e}\n", r.level, r.ndof, r.lambda));
            }
        }
        QuadratureMode::Gauss(_) => {
            s.push_str("level,ndof,lambda_bar,rel_gap\n");
            for r in rows.iter().filter(|r| r.n.is_some()) {
                s.push_str(&format!("{},{},{:e},{:e}\n", r.level, r.ndof, r.lambda_bar, r.rel_gap));
            }
        }
    }
    emit(args.out.as_deref(), &s)
}

fn stokes(args: &StokesArgs, exec: Execution) -> Result<()> {
    if args.domain != Domain::Square {
        return Err(CliError::Config("the Stokes problem is posed on the unit square".into()));
    }
    let orders = match args.quadrature {
        QuadratureMode::Exact => vec![],
        QuadratureMode::Gauss(n) => vec![n],
    };
    let cfg = StokesStudy {
        elements: args.elements,
        variant: args.variant,
        orders,
        rhs_degree: args.rhs_degree,
        exec,
    };
    let rows = run_stokes_study(&cfg)?;
    let keep: Vec<_> = match args.quadrature {
        QuadratureMode::Exact => rows.into_iter().filter(|r| r.n.is_none()).collect(),
        QuadratureMode::Gauss(_) => rows.into_iter().filter(|r| r.n.is_some()).collect(),
    };
    emit(args.out.as_deref(), &stokes_csv("stokes", &cfg, &keep))?;
    if let Some(th) = args.taylor_hood_ref {
        let r = &keep[0];
        eprintln!("grad_err={:e} taylor_hood_ref={th:e} exceeds={}", r.grad_err, r.grad_err > th);
    }
    Ok(())
}

fn write_svg(path: Option<&Path>, plot: experiments::Plot) -> Result<()> {
    if let Some(p) = path {
        let svg = plot.render()?;
        fs::write(p, svg).map_err(|source| CliError::Io { path: p.into(), source })?;
    }
    Ok(())
}

fn exp1(args: &Exp1Args, exec: Execution) -> Result<()> {
    let cfg = EigenStudy {
        refinement: Refinement::Uniform { levels: args.levels },
        max_ndof: args.max_ndof,
        orders: args.orders.0.clone(),
        variant: args.variant,
        tol: args.tol,
        exec,
        ..EigenStudy::square()
    };
    let rows = run_eigen_study(&cfg)?;
    emit(args.output.out.as_deref(), &eigen_csv("exp1", &cfg, &rows))?;
    write_svg(args.output.svg.as_deref(), eigen_plot("Unit square, uniform refinement", &rows))
}

fn exp2(args: &Exp2Args, exec: Execution) -> Result<()> {
    let cfg = EigenStudy {
        refinement: Refinement::Graded {
            theta: args.theta,
            growth: args.growth,
            area_power: args.area_power,
            max_steps: args.max_steps,
        },
        max_ndof: args.max_ndof,
        orders: args.orders.0.clone(),
        variant: args.variant,
        tol: args.tol,
        exec,
        ..EigenStudy::lshape()
    };
    let rows = run_eigen_study(&cfg)?;
    emit(args.output.out.as_deref(), &eigen_csv("exp2", &cfg, &rows))?;
    write_svg(args.output.svg.as_deref(), eigen_plot("L-shaped domain, graded meshes", &rows))
}

fn exp3(args: &Exp3Args, exec: Execution) -> Result<()> {
    let cfg = StokesStudy {
        elements: args.elements,
        variant: args.variant,
        orders: args.orders.0.clone(),
        rhs_degree: args.rhs_degree,
        exec,
    };
    let rows = run_stokes_study(&cfg)?;
    emit(args.output.out.as_deref(), &stokes_csv("exp3", &cfg, &rows))?;
    write_svg(args.output.svg.as_deref(), stokes_plot("Stokes, velocity error", &rows))?;
    eprintln!("taylor_hood_ref={TAYLOR_HOOD_REFERENCE:e}");
    Ok(())
}

fn dump_tables(args: &DumpArgs) -> Result<()> {
    let io_err = |p: &Path| {
        let path = p.to_path_buf();
        move |source| CliError::Io { path, source }
    };
    fs::create_dir_all(&args.dir).map_err(io_err(&args.dir))?;
    let z = ZienkiewiczTables::new(args.quadrature, args.zienkiewicz_rhs_degree)?;
    let g = GuzmanNeilanTables::new(args.quadrature, args.guzman_neilan_rhs_degree)?;
    for (name, t) in z.named_tensors().into_iter().chain(g.named_tensors()) {
        let p = args.dir.join(format!("{name}.csv"));
        let dims: Vec<String> = t.dims().iter().map(usize::to_string).collect();
        let body = format!("# {name} dims={} quadrature={}\n{}", dims.join("x"), args.quadrature, t.to_csv());
        fs::write(&p, body).map_err(io_err(&p))?;
    }
    Ok(())
}

fn mesh(cmd: &MeshCommand) -> Result<()> {
    match cmd {
        MeshCommand::Dump { domain, levels, out } => {
            let mut m = domain.coarse_mesh();
            for _ in 0..*levels {
                m = refine_red(&m);
            }
            let mut buf = Vec::new();
            write_mesh(&m, &mut buf)?;
            emit(out.as_deref(), &String::from_utf8_lossy(&buf))
        }
        MeshCommand::Load { file } => {
            let f = fs::File::open(file).map_err(|source| CliError::Io { path: file.clone(), source })?;
            let m = read_mesh(BufReader::new(f))?;
            let area: f64 = (0..m.num_elements()).map(|e| m.area(e)).sum();
            let bnodes = m.boundary_nodes().iter().filter(|&&b| b).count();
            println!(
                "nodes={} elements={} edges={} boundary_nodes={bnodes} area={area}",
                m.num_nodes(),
                m.num_elements(),
                m.num_edges()
            );
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    match &cli.command {
        Command::Quad(a) => quad(a),
        Command::BiharmonicEig(a) => biharmonic_eig(a, exec),
        Command::Stokes(a) => stokes(a, exec),
        Command::Exp1(a) => exp1(a, exec),
        Command::Exp2(a) => exp2(a, exec),
        Command::Exp3(a) => exp3(a, exec),
        Command::DumpTables(a) => dump_tables(a),
        Command::Mesh(c) => mesh(c),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
