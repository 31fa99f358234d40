//! `fracvx`: evaluate variable-exponent operators, solve Abel equations and
//! fractional Cauchy problems, and run the verification experiments.

mod config;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use fracvx_core::analysis::{self, estimate_order, self_convergence_gap, ExperimentConfig, ExperimentReport};
use fracvx_core::solvers::default_abel_grading;
use fracvx_core::{
    eval_forward, graded_mesh, parse_expr, solve_abel, solve_fde, AbelProblem, Error, FdeProblem, Family, OperatorSpec,
    SolutionGrid, VariableExponent,
};

use config::{render, ConfigFile};

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_ILL_POSED: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "fracvx", version, about = "Variable-exponent Abel and fractional integral equations")]
#[command(args_override_self = true)]
struct Cli {
    /// Config file of `key = value` lines under `[subcommand]` sections; flags win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Print the effective configuration and exit.
    #[arg(long, global = true)]
    dump_config: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Apply a forward operator to g at one point.
    Eval(EvalArgs),
    /// Solve the first-kind Abel equation with data f.
    SolveAbel(AbelArgs),
    /// Solve D^{α(t)} u = h, u(0) = u0.
    SolveFde(FdeArgs),
    /// Composition residuals and singularity-exponent experiments.
    Verify(VerifyArgs),
    /// Error or self-convergence table under mesh doubling.
    Convergence(ConvergenceArgs),
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    family: Family,
    #[arg(long)]
    alpha: String,
    #[arg(long)]
    g: String,
    #[arg(long)]
    t: f64,
    /// Tempering rate; tempered families only.
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    /// Interval on which α is validated; defaults to [0, t].
    #[arg(long)]
    horizon: Option<f64>,
    #[arg(long, default_value_t = 1e-12)]
    accuracy: f64,
}

#[derive(Args, Debug, Clone)]
struct MeshArgs {
    #[arg(long, default_value_t = 1.0)]
    horizon: f64,
    /// Number of panels.
    #[arg(long, default_value_t = 128)]
    n: usize,
    /// Grading exponent r; chosen from the problem when omitted.
    #[arg(long)]
    grading: Option<f64>,
    /// CSV destination; standard output when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AbelArgs {
    #[arg(long)]
    alpha: String,
    #[arg(long)]
    f: String,
    #[command(flatten)]
    mesh: MeshArgs,
}

#[derive(Args, Debug)]
struct FdeArgs {
    #[arg(long)]
    alpha: String,
    #[arg(long)]
    h: String,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    u0: f64,
    #[command(flatten)]
    mesh: MeshArgs,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value_t = 1.0)]
    horizon: f64,
    #[arg(long, default_value_t = 128)]
    n: usize,
    #[arg(long, default_value = "0.6 - 0.1*t")]
    abel_alpha: String,
    #[arg(long, default_value = "1 - t^2/2")]
    cauchy_alpha_flat: String,
    #[arg(long, default_value = "1 - t/2")]
    cauchy_alpha_sloped: String,
    #[arg(long, default_value = "0.5 + 0.2*t")]
    composition_alpha: String,
    /// CSV destination for the reports; standard output when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ConvergenceArgs {
    /// `abel` (data f) or `fde` (data h, initial value u0).
    #[arg(long, default_value = "abel")]
    problem: String,
    #[arg(long)]
    alpha: String,
    /// f for abel, h for fde.
    #[arg(long)]
    data: String,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    u0: f64,
    /// Exact solution; self-convergence gaps are reported when omitted.
    #[arg(long)]
    exact: Option<String>,
    #[arg(long, default_value_t = 32)]
    n_start: usize,
    #[arg(long, default_value_t = 4)]
    levels: usize,
    #[arg(long, default_value_t = 1.0)]
    horizon: f64,
    #[arg(long)]
    grading: Option<f64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Core(Error),
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => EXIT_CONFIG,
            Failure::Io(_) => EXIT_NUMERICAL,
            Failure::Core(e) => match e {
                Error::InvalidInitialValue { .. } => EXIT_ILL_POSED,
                e if e.is_numerical() || matches!(e, Error::Fit(_)) => EXIT_NUMERICAL,
                _ => EXIT_CONFIG,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Config(m) => m.clone(),
            Failure::Core(e) => e.to_string(),
            Failure::Io(e) => format!("i/o error: {e}"),
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let argv: Vec<OsString> = std::env::args_os().collect();
    let argv = match merge_config(argv) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("fracvx: {msg}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { 0 });
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("fracvx: {msg}");
        return ExitCode::from(EXIT_CONFIG);
    }
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("fracvx: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}

const SUBCOMMANDS: [&str; 5] = ["eval", "solve-abel", "solve-fde", "verify", "convergence"];

/// Splices flags from `--config FILE` in front of the user's own flags.
fn merge_config(argv: Vec<OsString>) -> std::result::Result<Vec<OsString>, String> {
    let strs: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let mut path = None;
    for (i, a) in strs.iter().enumerate() {
        if a == "--config" {
            path = strs.get(i + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else { return Ok(argv) };
    let Some(pos) = strs.iter().position(|a| SUBCOMMANDS.contains(&a.as_str())) else { return Ok(argv) };
    let file = ConfigFile::load(path.as_ref()).map_err(|e| e.to_string())?;
    let mut out: Vec<OsString> = argv[..=pos].to_vec();
    out.extend(file.flags_for(&strs[pos]).into_iter().map(OsString::from));
    out.extend(argv[pos + 1..].iter().cloned());
    Ok(out)
}

fn configure_threads() -> std::result::Result<(), String> {
    let Ok(v) = std::env::var("FRACVX_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| format!("FRACVX_THREADS must be a positive integer, got `{v}`"))?;
    if n == 0 {
        return Err("FRACVX_THREADS must be a positive integer, got `0`".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn dispatch(cli: Cli) -> Outcome {
    if cli.dump_config {
        print!("{}", dump(&cli.command));
        return Ok(());
    }
    match cli.command {
        Command::Eval(a) => run_eval(a),
        Command::SolveAbel(a) => run_abel(a),
        Command::SolveFde(a) => run_fde(a),
        Command::Verify(a) => run_verify(a),
        Command::Convergence(a) => run_convergence(a),
    }
}

fn mesh_entries(m: &MeshArgs) -> Vec<(&'static str, String)> {
    let mut v = vec![("horizon", m.horizon.to_string()), ("n", m.n.to_string())];
    if let Some(r) = m.grading {
        v.push(("grading", r.to_string()));
    }
    if let Some(o) = &m.output {
        v.push(("output", o.display().to_string()));
    }
    v
}

fn dump(cmd: &Command) -> String {
    match cmd {
        Command::Eval(a) => {
            let mut v = vec![
                ("family", a.family.to_string()),
                ("alpha", a.alpha.clone()),
                ("g", a.g.clone()),
                ("t", a.t.to_string()),
                ("sigma", a.sigma.to_string()),
                ("accuracy", a.accuracy.to_string()),
            ];
            if let Some(h) = a.horizon {
                v.push(("horizon", h.to_string()));
            }
            render("eval", &v)
        }
        Command::SolveAbel(a) => {
            let mut v = vec![("alpha", a.alpha.clone()), ("f", a.f.clone())];
            v.extend(mesh_entries(&a.mesh));
            render("solve-abel", &v)
        }
        Command::SolveFde(a) => {
            let mut v = vec![("alpha", a.alpha.clone()), ("h", a.h.clone()), ("u0", a.u0.to_string())];
            v.extend(mesh_entries(&a.mesh));
            render("solve-fde", &v)
        }
        Command::Verify(a) => {
            let mut v = vec![
                ("horizon", a.horizon.to_string()),
                ("n", a.n.to_string()),
                ("abel-alpha", a.abel_alpha.clone()),
                ("cauchy-alpha-flat", a.cauchy_alpha_flat.clone()),
                ("cauchy-alpha-sloped", a.cauchy_alpha_sloped.clone()),
                ("composition-alpha", a.composition_alpha.clone()),
            ];
            if let Some(o) = &a.output {
                v.push(("output", o.display().to_string()));
            }
            render("verify", &v)
        }
        Command::Convergence(a) => {
            let mut v = vec![
                ("problem", a.problem.clone()),
                ("alpha", a.alpha.clone()),
                ("data", a.data.clone()),
                ("u0", a.u0.to_string()),
                ("n-start", a.n_start.to_string()),
                ("levels", a.levels.to_string()),
                ("horizon", a.horizon.to_string()),
            ];
            if let Some(x) = &a.exact {
                v.push(("exact", x.clone()));
            }
            if let Some(r) = a.grading {
                v.push(("grading", r.to_string()));
            }
            if let Some(o) = &a.output {
                v.push(("output", o.display().to_string()));
            }
            render("convergence", &v)
        }
    }
}

/// Rounds to 15 significant digits so exact values print exactly.
fn tidy(v: f64) -> f64 {
    format!("{v:.14e}").parse().unwrap_or(v)
}

fn run_eval(a: EvalArgs) -> Outcome {
    let horizon = a.horizon.unwrap_or(if a.t > 0.0 { a.t } else { 1.0 });
    if a.t < 0.0 || a.t > horizon {
        return Err(Failure::Config(format!("t = {} lies outside [0, {horizon}]", a.t)));
    }
    let alpha = parse_expr(&a.alpha)?;
    let exponent = if a.family.is_abel() {
        VariableExponent::new(alpha, horizon)?
    } else {
        VariableExponent::for_riemann_liouville(alpha, horizon)?
    };
    let spec = if a.family.is_tempered() {
        OperatorSpec::tempered(a.family, exponent, a.sigma)?
    } else if a.sigma != 0.0 {
        return Err(Failure::Config(format!("--sigma applies to tempered families only, not {}", a.family)));
    } else {
        OperatorSpec::new(a.family, exponent)?
    };
    let g = parse_expr(&a.g)?;
    let v = eval_forward(&spec, &g, a.t, a.accuracy)?;
    println!("{:?}", tidy(v));
    Ok(())
}

fn open_output(path: &Option<PathBuf>) -> std::result::Result<Box<dyn Write>, Failure> {
    match path {
        Some(p) => {
            let f = File::create(p).map_err(|e| Failure::Config(format!("cannot create {}: {e}", p.display())))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

/// Writes the grid as CSV and a short summary to standard error.
fn emit(grid: &SolutionGrid, output: &Option<PathBuf>) -> Outcome {
    let mut w = open_output(output)?;
    grid.write_csv(&mut w)?;
    w.flush()?;
    let d = &grid.diagnostics;
    let fit = d.fit.as_ref().map_or_else(|| "n/a".to_string(), |f| format!("{:.6} (r2 = {:.6})", f.exponent_p, f.r_squared));
    let wmax = grid.weighted_u.iter().map(|v| v.abs()).fold(0.0, f64::max);
    eprintln!("nodes             {}", grid.u.len());
    eprintln!("fitted exponent   {fit}");
    eprintln!("u(0) extrapolated {:.10e}", d.u0_extrapolated);
    eprintln!("max |weighted u|  {wmax:.10e}");
    eprintln!("max |du|          {:.10e}", grid.max_abs_du());
    Ok(())
}

fn run_abel(a: AbelArgs) -> Outcome {
    let e = VariableExponent::new(parse_expr(&a.alpha)?, a.mesh.horizon)?;
    let r = a.mesh.grading.unwrap_or_else(|| default_abel_grading(e.alpha0()));
    let p = AbelProblem::new(e, parse_expr(&a.f)?)?;
    let grid = solve_abel(&p, &graded_mesh(a.mesh.horizon, a.mesh.n, r)?)?;
    emit(&grid, &a.mesh.output)
}

fn fde_problem(alpha: &str, h: &str, u0: f64, horizon: f64) -> Result<(FdeProblem, f64), Failure> {
    let e = VariableExponent::new(parse_expr(alpha)?, horizon)?;
    let r = if e.alpha0() == 1.0 { 1.0 } else { default_abel_grading(e.alpha0()) };
    Ok((FdeProblem::new(e, parse_expr(h)?, u0)?, r))
}

fn run_fde(a: FdeArgs) -> Outcome {
    let (p, r) = fde_problem(&a.alpha, &a.h, a.u0, a.mesh.horizon)?;
    let r = a.mesh.grading.unwrap_or(r);
    let grid = solve_fde(&p, &graded_mesh(a.mesh.horizon, a.mesh.n, r)?)?;
    emit(&grid, &a.mesh.output)
}

fn run_verify(a: VerifyArgs) -> Outcome {
    let cfg = ExperimentConfig {
        horizon: a.horizon,
        abel_alpha: a.abel_alpha,
        cauchy_alpha_flat: a.cauchy_alpha_flat,
        cauchy_alpha_sloped: a.cauchy_alpha_sloped,
        composition_alpha: a.composition_alpha,
        panels: a.n,
    };
    let reports = analysis::run_all(&cfg)?;
    let mut w = open_output(&a.output)?;
    writeln!(w, "{}", ExperimentReport::CSV_HEADER)?;
    for r in &reports {
        writeln!(w, "{}", r.csv_row())?;
    }
    w.flush()?;
    for r in &reports {
        eprintln!("{}", r.summary_line());
    }
    let failed = reports.iter().filter(|r| !r.passed()).count();
    if failed > 0 {
        return Err(Failure::Core(Error::QuadratureFailure(format!("{failed} experiment(s) outside tolerance"))));
    }
    Ok(())
}

fn run_convergence(a: ConvergenceArgs) -> Outcome {
    if a.levels < 2 {
        return Err(Failure::Config("--levels must be at least 2".into()));
    }
    let ns: Vec<usize> = (0..a.levels).map(|k| a.n_start << k).collect();
    let exact = a.exact.as_deref().map(parse_expr).transpose()?;
    let solve: Box<dyn Fn(usize) -> fracvx_core::Result<SolutionGrid> + Sync> = match a.problem.as_str() {
        "abel" => {
            let e = VariableExponent::new(parse_expr(&a.alpha)?, a.horizon)?;
            let r = a.grading.unwrap_or_else(|| default_abel_grading(e.alpha0()));
            let p = AbelProblem::new(e, parse_expr(&a.data)?)?;
            let horizon = a.horizon;
            Box::new(move |n| solve_abel(&p, &graded_mesh(horizon, n, r)?))
        }
        "fde" => {
            let (p, r) = fde_problem(&a.alpha, &a.data, a.u0, a.horizon)?;
            let r = a.grading.unwrap_or(r);
            let horizon = a.horizon;
            Box::new(move |n| solve_fde(&p, &graded_mesh(horizon, n, r)?))
        }
        other => return Err(Failure::Config(format!("--problem must be `abel` or `fde`, got `{other}`"))),
    };
    let mut sizes = ns.clone();
    if exact.is_none() {
        sizes.push(ns[ns.len() - 1] * 2);
    }
    let grids: Vec<SolutionGrid> = sizes.par_iter().map(|&n| solve(n)).collect::<fracvx_core::Result<_>>()?;
    let errors: Vec<f64> = match &exact {
        Some(x) => grids.iter().map(|g| g.max_error(|t| x.eval(t).unwrap_or(f64::NAN))).collect(),
        None => grids.windows(2).map(|w| self_convergence_gap(&w[0], &w[1])).collect(),
    };
    let est = estimate_order(&errors, &ns)?;
    let mut w = open_output(&a.output)?;
    writeln!(w, "n,error,order")?;
    for (k, (&n, &e)) in est.ns.iter().zip(&est.errors).enumerate() {
        let order = if k == 0 { String::new() } else { format!("{:.16e}", est.orders[k - 1]) };
        writeln!(w, "{n},{e:.16e},{order}")?;
    }
    w.flush()?;
    let kind = if exact.is_some() { "error vs exact" } else { "gap to 2N" };
    eprintln!("{kind}; min observed order {:.4}", est.min_order());
    Ok(())
}
