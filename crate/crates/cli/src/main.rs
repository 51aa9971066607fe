//! `riesz-tau`: batch front end for the preconditioned Toeplitz solvers.

mod problem;
mod table;

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use riesz_tau::krylov::{DEFAULT_MAX_ITER, DEFAULT_TOL};
use riesz_tau::preconditioners::PreconditionerKind;
use riesz_tau::spectral::{
    dense_preconditioned_spectrum, lanczos_extremes, SpectrumReport, LANCZOS_MAX_ITER, LANCZOS_TOL,
};
use riesz_tau::toeplitz_ops::DEFAULT_DENSE_CAP;
use riesz_tau::{pcg, PcgOptions};

use problem::{ProblemArgs, ProblemSpec};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numerical(String),
    #[error(transparent)]
    Lib(#[from] riesz_tau::Error),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use riesz_tau::Error as E;
        match self {
            CliError::Usage(_) | CliError::Json(_) => 2,
            CliError::Lib(E::Domain(_) | E::Argument(_) | E::DimensionMismatch { .. }) => 2,
            CliError::Lib(E::Resource { .. }) | CliError::Io(_) | CliError::Csv(_) => 4,
            CliError::Lib(_) | CliError::Numerical(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "riesz-tau",
    version,
    about = "Preconditioned solvers for Riesz fractional diffusion systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one system with PCG and report iterations and errors.
    Solve(SolveArgs),
    /// Extreme eigenvalues of the preconditioned matrix.
    Spectrum(SpectrumArgs),
    /// Iteration-count tables as CSV.
    Table(TableArgs),
    /// Re-run the experiment recorded in a manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Method {
    Dense,
    Lanczos,
}

#[derive(Debug, Clone, Args)]
struct OutputArgs {
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, default_value = "tau", value_parser = parse_precond)]
    precond: PreconditionerKind,
    #[arg(long, default_value_t = DEFAULT_TOL, allow_negative_numbers = true)]
    tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    max_iter: usize,
    /// Run PCG even when the preconditioner is not positive definite.
    #[arg(long)]
    allow_indefinite: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, default_value = "tau", value_parser = parse_precond)]
    precond: PreconditionerKind,
    #[arg(long, value_enum, default_value_t = Method::Lanczos)]
    method: Method,
    /// Largest order the dense method will materialize.
    #[arg(long, default_value_t = DEFAULT_DENSE_CAP)]
    max_dense: usize,
    /// Write every eigenvalue as CSV (dense method only).
    #[arg(long)]
    eigenvalues: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct TableArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
    table: u8,
    /// Largest size label (2^k) to run; defaults to 1024, 256, 64, 512 for
    /// tables 1-4.
    #[arg(long)]
    max_size: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_TOL, allow_negative_numbers = true)]
    tol: f64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct ReplayArgs {
    manifest: PathBuf,
    #[command(flatten)]
    output: OutputArgs,
}

fn parse_precond(s: &str) -> Result<PreconditionerKind, String> {
    s.parse().map_err(|e: riesz_tau::Error| e.to_string())
}

/// What ran, with every parameter needed to run it again.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
enum Task {
    Solve {
        problem: ProblemSpec,
        precond: String,
        tol: f64,
        max_iter: usize,
        allow_indefinite: bool,
    },
    Spectrum {
        problem: ProblemSpec,
        precond: String,
        method: Method,
        max_dense: usize,
    },
    Table {
        table: u8,
        max_size: usize,
        tol: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RunManifest {
    #[serde(flatten)]
    task: Task,
    /// Seed of any random vector; the Lanczos start vector uses a fixed
    /// internal seed.
    seed: Option<u64>,
    version: String,
    threads: usize,
    #[serde(default)]
    wall_ms: WallTimes,
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
struct WallTimes {
    setup: f64,
    run: f64,
}

#[derive(Debug, Serialize)]
struct Report {
    manifest: RunManifest,
    iterations: usize,
    residual_history: Vec<f64>,
    lambda_min: Option<f64>,
    lambda_max: Option<f64>,
    max_error: Option<f64>,
    wall_ms: f64,
    precond: String,
    converged: bool,
    true_residual: Option<f64>,
    l2_error: Option<f64>,
    condition_number: Option<f64>,
    method: Option<Method>,
}

#[derive(Debug, Serialize)]
struct TableReport {
    manifest: RunManifest,
    omitted: Vec<&'static str>,
    rows: Vec<table::Row>,
    wall_ms: f64,
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn parse_kind(name: &str) -> Result<PreconditionerKind, CliError> {
    name.parse()
        .map_err(|e: riesz_tau::Error| CliError::Usage(e.to_string()))
}

fn check_tol(tol: f64) -> Result<(), CliError> {
    if tol > 0.0 && tol < 1.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "--tol must lie in (0, 1), got {tol}"
        )))
    }
}

fn manifest(task: Task, seed: Option<u64>) -> RunManifest {
    RunManifest {
        task,
        seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        threads: rayon::current_num_threads(),
        wall_ms: WallTimes::default(),
    }
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

/// Manifest next to a CSV output file, so the run stays replayable.
fn write_sidecar(path: Option<&Path>, m: &RunManifest) -> Result<(), CliError> {
    if let Some(p) = path {
        let mut name = p.as_os_str().to_owned();
        name.push(".manifest.json");
        let f = File::create(PathBuf::from(name))?;
        serde_json::to_writer_pretty(f, m)?;
    }
    Ok(())
}

fn run(task: Task, output: &OutputArgs, eigenvalues: Option<&Path>) -> Result<(), CliError> {
    let seed = match &task {
        Task::Solve { problem, .. } | Task::Spectrum { problem, .. } => problem.seed(),
        Task::Table { .. } => None,
    };
    let mut m = manifest(task.clone(), seed);
    let out = output.out.as_deref();
    match task {
        Task::Solve {
            problem,
            precond,
            tol,
            max_iter,
            allow_indefinite,
        } => {
            check_tol(tol)?;
            if max_iter == 0 {
                return Err(CliError::Usage("--max-iter must be positive".into()));
            }
            let kind = parse_kind(&precond)?;
            let start = Instant::now();
            let system = problem.build()?;
            let p = system.preconditioner(kind)?;
            m.wall_ms.setup = ms(start);
            let opts = PcgOptions {
                tol,
                max_iter,
                allow_indefinite,
            };
            let run_start = Instant::now();
            let rep = pcg(system.operator(), p.as_ref(), system.rhs(), None, &opts)?;
            m.wall_ms.run = ms(run_start);
            let errors = system.errors(&rep.solution)?;
            let total = ms(start);
            match output.format.unwrap_or(Format::Json) {
                Format::Json => {
                    let report = Report {
                        manifest: m,
                        iterations: rep.iterations,
                        residual_history: rep.residual_history,
                        lambda_min: None,
                        lambda_max: None,
                        max_error: errors.map(|e| e.max),
                        wall_ms: total,
                        precond,
                        converged: rep.converged,
                        true_residual: Some(rep.true_residual),
                        l2_error: errors.map(|e| e.l2),
                        condition_number: None,
                        method: None,
                    };
                    let mut w = open_out(out)?;
                    serde_json::to_writer_pretty(&mut w, &report)?;
                    writeln!(w)?;
                }
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(open_out(out)?);
                    w.write_record(["iteration", "relative_residual"])?;
                    for (i, r) in rep.residual_history.iter().enumerate() {
                        w.write_record([i.to_string(), format!("{r:e}")])?;
                    }
                    w.flush()?;
                    write_sidecar(out, &m)?;
                }
            }
        }
        Task::Spectrum {
            problem,
            precond,
            method,
            max_dense,
        } => {
            let kind = parse_kind(&precond)?;
            if eigenvalues.is_some() && method != Method::Dense {
                return Err(CliError::Usage("--eigenvalues needs --method dense".into()));
            }
            if output.format == Some(Format::Csv) {
                return Err(CliError::Usage(
                    "spectrum reports are JSON; use --eigenvalues for CSV".into(),
                ));
            }
            let start = Instant::now();
            let system = problem.build()?;
            let p = system.preconditioner(kind)?;
            m.wall_ms.setup = ms(start);
            let run_start = Instant::now();
            let found: SpectrumReport = match method {
                Method::Dense => {
                    let eigs =
                        dense_preconditioned_spectrum(system.operator(), p.as_ref(), max_dense)?;
                    if let Some(path) = eigenvalues {
                        let mut w = csv::Writer::from_path(path)?;
                        w.write_record(["index", "eigenvalue"])?;
                        for (i, v) in eigs.iter().enumerate() {
                            w.write_record([i.to_string(), format!("{v:e}")])?;
                        }
                        w.flush()?;
                    }
                    SpectrumReport::from_eigenvalues(&eigs)?
                }
                Method::Lanczos => {
                    lanczos_extremes(system.operator(), p.as_ref(), LANCZOS_MAX_ITER, LANCZOS_TOL)?
                }
            };
            m.wall_ms.run = ms(run_start);
            let report = Report {
                manifest: m,
                iterations: found.iterations,
                residual_history: Vec::new(),
                lambda_min: Some(found.lambda_min),
                lambda_max: Some(found.lambda_max),
                max_error: None,
                wall_ms: ms(start),
                precond,
                converged: found.converged,
                true_residual: None,
                l2_error: None,
                condition_number: Some(found.condition_number()),
                method: Some(method),
            };
            let mut w = open_out(out)?;
            serde_json::to_writer_pretty(&mut w, &report)?;
            writeln!(w)?;
        }
        Task::Table {
            table,
            max_size,
            tol,
        } => {
            check_tol(tol)?;
            let def = table::table_def(table)?;
            if !def.omitted.is_empty() {
                eprintln!("note: columns not reproduced: {}", def.omitted.join(", "));
            }
            let start = Instant::now();
            let rows = table::run_table(table, max_size, tol)?;
            m.wall_ms.run = ms(start);
            match output.format.unwrap_or(Format::Csv) {
                Format::Csv => {
                    table::write_csv(&rows, table, open_out(out)?)?;
                    write_sidecar(out, &m)?;
                }
                Format::Json => {
                    let report = TableReport {
                        manifest: m,
                        omitted: def.omitted.to_vec(),
                        rows,
                        wall_ms: ms(start),
                    };
                    let mut w = open_out(out)?;
                    serde_json::to_writer_pretty(&mut w, &report)?;
                    writeln!(w)?;
                }
            }
        }
    }
    Ok(())
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("RIESZ_TAU_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().ok().filter(|&t| t > 0).ok_or_else(|| {
        CliError::Usage(format!("RIESZ_TAU_THREADS={raw:?} is not a positive count"))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Solve(a) => {
            let task = Task::Solve {
                problem: a.problem.resolve()?,
                precond: a.precond.name().into(),
                tol: a.tol,
                max_iter: a.max_iter,
                allow_indefinite: a.allow_indefinite,
            };
            run(task, &a.output, None)
        }
        Command::Spectrum(a) => {
            let task = Task::Spectrum {
                problem: a.problem.resolve()?,
                precond: a.precond.name().into(),
                method: a.method,
                max_dense: a.max_dense,
            };
            run(task, &a.output, a.eigenvalues.as_deref())
        }
        Command::Table(a) => {
            let max_size = match a.max_size {
                Some(s) => s,
                None => table::table_def(a.table)?.default_max_size,
            };
            let task = Task::Table {
                table: a.table,
                max_size,
                tol: a.tol,
            };
            run(task, &a.output, None)
        }
        Command::Replay(a) => {
            let text = std::fs::read_to_string(&a.manifest)
                .map_err(|e| CliError::Usage(format!("{}: {e}", a.manifest.display())))?;
            let m: RunManifest = serde_json::from_str(&text)?;
            run(m.task, &a.output, None)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
