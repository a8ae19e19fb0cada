//! Command line front end.
//!
//! Settings come from an optional flat `key = value` file (`--config`)
//! and are then overridden by flags.

pub mod config;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::analysis::run_convergence_study;
use crate::error::{Error, Result};
use crate::problems::BUILTIN_NAMES;
use crate::scheme::solve;
use crate::stability::{deviation, solve_perturbed, PerturbationSpec};

pub use config::{Command, RunConfig};
use report::{emit_report, fmt_real, stability_csv, write_file, StabilityRow};

/// Environment variable capping the worker thread count (0 = automatic).
pub const THREADS_ENV: &str = "BSDE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "fbsde", version, about = "Two-step numerical scheme for decoupled forward-backward SDEs")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Solve once per (alpha, N) and print Y, Z at (0, x0).
    Solve(RunArgs),
    /// Convergence study: one CSV report per alpha.
    Converge(RunArgs),
    /// Deviation under constant generator perturbations.
    Stability(RunArgs),
    /// List the built-in problems.
    Problems,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Flat key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    /// Comma separated list of alpha values in (0, 1].
    #[arg(long)]
    alpha: Option<String>,
    /// Comma separated list of time step counts.
    #[arg(long = "N")]
    steps: Option<String>,
    /// Gauss–Hermite order.
    #[arg(long = "K")]
    quadrature_order: Option<String>,
    #[arg(long)]
    halfwidth_sigmas: Option<String>,
    #[arg(long)]
    grid_points: Option<String>,
    /// Output directory for reports.
    #[arg(long)]
    out: Option<String>,
    /// Also write an SVG plot per report.
    #[arg(long)]
    svg: bool,
    /// Write `NA` instead of measured runtimes.
    #[arg(long)]
    no_runtime: bool,
    /// Comma separated perturbation magnitudes for `stability`.
    #[arg(long, allow_hyphen_values = true)]
    c: Option<String>,
}

impl RunArgs {
    fn overrides(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        let mut push = |k: &'static str, v: &Option<String>| {
            if let Some(v) = v {
                out.push((k, v.clone()));
            }
        };
        push("problem", &self.problem);
        push("a", &self.a);
        push("x0", &self.x0);
        push("alpha", &self.alpha);
        push("N", &self.steps);
        push("quadrature.K", &self.quadrature_order);
        push("grid.halfwidth_sigmas", &self.halfwidth_sigmas);
        push("grid.points", &self.grid_points);
        push("output", &self.out);
        push("stability.c", &self.c);
        if self.svg {
            out.push(("svg", "true".into()));
        }
        if self.no_runtime {
            out.push(("report.runtime", "false".into()));
        }
        out
    }
}

/// Parses command line arguments (including the program name) into a
/// validated configuration.
pub fn parse_config<I, T>(args: I) -> Result<RunConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::Usage(e.to_string()))?;
    let (command, run) = match cli.command {
        Sub::Solve(r) => (Command::Solve, Some(r)),
        Sub::Converge(r) => (Command::Converge, Some(r)),
        Sub::Stability(r) => (Command::Stability, Some(r)),
        Sub::Problems => (Command::Problems, None),
    };
    let mut cfg = RunConfig::new(command);
    if let Some(run) = run {
        if let Some(path) = &run.config {
            cfg.apply_file(path)?;
        }
        for (k, v) in run.overrides() {
            cfg.set(k, &v)?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn thread_count() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::Usage(format!("{THREADS_ENV} must be a non-negative integer, got '{v}'"))),
        Err(_) => Ok(0),
    }
}

/// Executes a parsed configuration, writing progress to `out`.
pub fn execute(cfg: &RunConfig, out: &mut (dyn Write + Send)) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count()?)
        .build()
        .map_err(|e| Error::config(format!("thread pool: {e}")))?;
    pool.install(|| match cfg.command {
        Command::Problems => list_problems(out),
        Command::Solve => run_solve(cfg, out),
        Command::Converge => run_converge(cfg, out),
        Command::Stability => run_stability(cfg, out),
    })
}

fn io_err(e: std::io::Error) -> Error {
    Error::Io { path: PathBuf::from("<stdout>"), source: e }
}

fn list_problems(out: &mut dyn Write) -> Result<()> {
    for name in BUILTIN_NAMES {
        writeln!(out, "{name}").map_err(io_err)?;
    }
    Ok(())
}

fn run_solve(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let problem = cfg.resolve_problem()?;
    writeln!(out, "alpha,N,y0,z0,err_y,err_z").map_err(io_err)?;
    let na = |v: Option<f64>| v.map(fmt_real).unwrap_or_else(|| "NA".into());
    for &alpha in &cfg.alphas {
        for &n in &cfg.steps {
            let r = solve(&problem, &cfg.scheme_params(alpha), n, false)?;
            writeln!(out, "{alpha},{n},{},{},{},{}", fmt_real(r.y0), fmt_real(r.z0), na(r.err_y), na(r.err_z))
                .map_err(io_err)?;
        }
    }
    Ok(())
}

fn run_converge(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let problem = cfg.resolve_problem()?;
    for &alpha in &cfg.alphas {
        let rep = run_convergence_study(&problem, &cfg.scheme_params(alpha), &cfg.steps)?;
        for path in emit_report(&rep, &cfg.output_dir, cfg.emit_svg, cfg.record_runtime)? {
            writeln!(out, "wrote {}", path.display()).map_err(io_err)?;
        }
    }
    Ok(())
}

fn run_stability(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let problem = cfg.resolve_problem()?;
    std::fs::create_dir_all(&cfg.output_dir).map_err(|source| Error::Io { path: cfg.output_dir.clone(), source })?;
    for &alpha in &cfg.alphas {
        let params = cfg.scheme_params(alpha);
        let mut rows = Vec::new();
        for &n in &cfg.steps {
            let base = solve(&problem, &params, n, true)?;
            for &c in &cfg.perturbations {
                let pert = solve_perturbed(&problem, &params, n, &PerturbationSpec::constant_generator(c))?;
                let d = deviation(&base, &pert)?;
                rows.push(StabilityRow { c, steps: n, dev: d.dev, dev_y0: d.dev_y0, dev_z_sum: d.dev_z_sum });
            }
        }
        let path = cfg.output_dir.join(format!("stability_{}_{alpha}.csv", problem.name));
        write_file(&path, &stability_csv(&rows))?;
        writeln!(out, "wrote {}", path.display()).map_err(io_err)?;
    }
    Ok(())
}

/// Full entry point: parses `args`, runs, and returns the process exit
/// code (0 success, 1 runtime failure, 2 usage or configuration error).
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    // --help and --version are successes, not usage errors
    if let Err(e) = Cli::try_parse_from(&args) {
        if !e.use_stderr() {
            let _ = e.print();
            return 0;
        }
    }
    let result = parse_config(&args).and_then(|cfg| {
        let mut stdout = std::io::stdout();
        execute(&cfg, &mut stdout)
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("fbsde: {e}");
            e.exit_code()
        }
    }
}
