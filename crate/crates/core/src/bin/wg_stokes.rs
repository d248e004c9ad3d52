//! Batch CLI for the WG Stokes solver: single solves, convergence tables,
//! iteration-count tables and spectral bound reports.
//!
//! Exit codes: 0 on success, 2 when a spectral bound check is violated,
//! 3 when a solver fails to converge; 1 for usage or I/O errors.

use std::collections::HashMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wg_stokes::error::Error;
use wg_stokes::experiments::{
    convergence_csv, iterations_csv, run_convergence, run_iterations, run_spectrum,
    solve_to_solution, write_output, ExperimentConfig, ManufacturedCase, PrecondChoice, SolverKind,
};
use wg_stokes::krylov::InnerSolve;
use wg_stokes::system::D11Mode;

#[derive(Parser)]
#[command(name = "wg-stokes", version, about = "Weak Galerkin Stokes solver experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the manufactured problem once and report the iteration count,
    /// residuals and discretization errors.
    Solve(CommonArgs),
    /// Manufactured-solution convergence table over mesh levels.
    Convergence(CommonArgs),
    /// Iteration-count tables over (d11, mu, level) per preconditioner.
    Iterations(CommonArgs),
    /// Eigenvalue spectra and bound checks on coarse meshes.
    Spectrum(CommonArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Spatial dimension (2 or 3).
    #[arg(long)]
    dim: Option<usize>,
    /// Comma-separated mesh levels (subdivisions per axis), e.g. 8,16,32.
    #[arg(long)]
    levels: Option<String>,
    /// Comma-separated viscosities, e.g. 1,1e-4.
    #[arg(long)]
    mu: Option<String>,
    /// Comma-separated regularization weights: one | cell.
    #[arg(long)]
    d11: Option<String>,
    /// Comma-separated preconditioners: pd | pl- | pl+ | pu- | pu+.
    #[arg(long)]
    precond: Option<String>,
    /// Krylov method: minres | gmres (defaults to the natural pairing).
    #[arg(long)]
    solver: Option<String>,
    /// Relative residual tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// GMRES restart length.
    #[arg(long)]
    restart: Option<usize>,
    /// Maximum iterations.
    #[arg(long)]
    maxit: Option<usize>,
    /// Inner solve for the velocity block: direct | pcg:droptol,tol.
    #[arg(long)]
    inner: Option<String>,
    /// Output directory for CSV files.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Flat key=value config file; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn parse_list<T, F>(s: &str, parse: F) -> Result<Vec<T>, Error>
where
    F: Fn(&str) -> Result<T, Error>,
{
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(parse)
        .collect()
}

fn parse_f64(s: &str) -> Result<f64, Error> {
    s.parse::<f64>()
        .map_err(|_| Error::Config(format!("expected a number, got '{s}'")))
}

fn parse_usize(s: &str) -> Result<usize, Error> {
    s.parse::<usize>()
        .map_err(|_| Error::Config(format!("expected an integer, got '{s}'")))
}

fn parse_d11(s: &str) -> Result<D11Mode, Error> {
    match s {
        "one" => Ok(D11Mode::One),
        "cell" | "cell_measure" => Ok(D11Mode::CellMeasure),
        other => Err(Error::Config(format!("unknown d11 mode '{other}'"))),
    }
}

fn parse_inner(s: &str) -> Result<InnerSolve, Error> {
    if s == "direct" {
        return Ok(InnerSolve::Direct);
    }
    if let Some(rest) = s.strip_prefix("pcg:") {
        let parts: Vec<&str> = rest.split(',').collect();
        if parts.len() == 2 {
            return Ok(InnerSolve::Pcg {
                droptol: parse_f64(parts[0])?,
                tol: parse_f64(parts[1])?,
            });
        }
    }
    Err(Error::Config(format!(
        "inner solve must be 'direct' or 'pcg:droptol,tol', got '{s}'"
    )))
}

fn parse_solver(s: &str) -> Result<SolverKind, Error> {
    match s {
        "minres" => Ok(SolverKind::Minres),
        "gmres" => Ok(SolverKind::Gmres),
        other => Err(Error::Config(format!("unknown solver '{other}'"))),
    }
}

/// Merges CLI flags over a flat key=value config file over the defaults.
fn resolve(args: &CommonArgs) -> Result<ExperimentConfig, Error> {
    let mut file: HashMap<String, String> = HashMap::new();
    if let Some(path) = &args.config {
        for (lineno, line) in std::fs::read_to_string(path)?.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("{}:{}: expected key=value", path.display(), lineno + 1))
            })?;
            file.insert(k.trim().to_string(), v.trim().to_string());
        }
    }
    let pick = |cli: &Option<String>, key: &str| -> Option<String> {
        cli.clone().or_else(|| file.get(key).cloned())
    };

    let dim = args
        .dim
        .or_else(|| file.get("dim").and_then(|v| v.parse().ok()))
        .unwrap_or(2);
    let mut config = ExperimentConfig::defaults(dim)?;
    if let Some(s) = pick(&args.levels, "levels") {
        config.levels = parse_list(&s, parse_usize)?;
    }
    if let Some(s) = pick(&args.mu, "mu") {
        config.mu_list = parse_list(&s, parse_f64)?;
    }
    if let Some(s) = pick(&args.d11, "d11") {
        config.d11_modes = parse_list(&s, parse_d11)?;
    }
    if let Some(s) = pick(&args.precond, "precond") {
        config.preconds = parse_list(&s, PrecondChoice::parse)?;
    }
    if let Some(s) = pick(&args.solver, "solver") {
        config.solver = Some(parse_solver(&s)?);
    }
    if let Some(t) = args.tol.or_else(|| file.get("tol").and_then(|v| v.parse().ok())) {
        config.tol = t;
    }
    if let Some(r) = args.restart.or_else(|| file.get("restart").and_then(|v| v.parse().ok())) {
        config.restart = r;
    }
    if let Some(m) = args.maxit.or_else(|| file.get("maxit").and_then(|v| v.parse().ok())) {
        config.maxit = m;
    }
    if let Some(s) = pick(&args.inner, "inner") {
        config.inner = parse_inner(&s)?;
    }
    config.out_dir = args.out.clone().or_else(|| file.get("out").map(PathBuf::from));
    Ok(config)
}

fn cmd_solve(config: &ExperimentConfig) -> Result<u8, Error> {
    let case = ManufacturedCase::for_dim(config.dim)?;
    let n = *config.levels.first().unwrap_or(&8);
    let mu = *config.mu_list.first().unwrap_or(&1.0);
    let mode = *config.d11_modes.first().unwrap_or(&D11Mode::One);
    let precond = *config.preconds.first().unwrap_or(&PrecondChoice::Pd);
    let solver = config.solver.unwrap_or_else(|| precond.default_solver());

    let (space, sys) = wg_stokes::experiments::build_problem(case, n, mu, mode)?;
    let (solution, report) = solve_to_solution(
        &sys,
        solver,
        precond,
        config.inner,
        config.tol,
        config.restart,
        config.maxit,
    )?;
    let mesh = wg_stokes::mesh::generate_structured_mesh(config.dim, n)?;
    let errors = wg_stokes::assembly::compute_errors(
        &mesh,
        &space,
        &solution,
        |x| case.velocity(x),
        |x| case.velocity_gradient(x),
        |x| case.pressure(x),
    )?;

    println!(
        "dim={} level={} mu={} d11={} precond={} solver={}",
        config.dim,
        n,
        mu,
        mode.label(),
        precond.label(),
        solver.label()
    );
    println!("elements={} unknowns={}", space.n_elements, space.n_total());
    println!(
        "iterations={} converged={} precond_residual={:.3e} true_residual={:.3e}",
        report.iterations,
        report.converged,
        report.final_residual(),
        report.final_true_residual()
    );
    println!(
        "err_p={:.6e} err_grad={:.6e} err_u0={:.6e} err_proj={:.6e}",
        errors.err_p, errors.err_grad, errors.err_u0, errors.err_proj
    );
    println!("pinned_pressure={:.3e}", solution.pressure[0]);

    if let Some(dir) = &config.out_dir {
        std::fs::create_dir_all(dir)?;
        let mut f = std::fs::File::create(dir.join("residuals.csv"))?;
        report.write_csv(&mut f)?;
    }
    Ok(if report.converged { 0 } else { 3 })
}

fn cmd_convergence(config: &ExperimentConfig) -> Result<u8, Error> {
    let case = ManufacturedCase::for_dim(config.dim)?;
    for &mu in &config.mu_list {
        let rows = match run_convergence(
            case,
            &config.levels,
            mu,
            config.tol,
            config.maxit,
            config.inner,
        ) {
            Ok(rows) => rows,
            Err(Error::SolverFailed { iterations, residual }) => {
                eprintln!(
                    "solver failed at mu={mu}: {iterations} iterations, residual {residual:.3e}"
                );
                return Ok(3);
            }
            Err(e) => return Err(e),
        };
        let csv = convergence_csv(&rows);
        println!("# convergence dim={} mu={}", config.dim, mu);
        print!("{csv}");
        if let Some(dir) = &config.out_dir {
            write_output(dir, &format!("convergence_{}d_mu{}.csv", config.dim, mu), &csv)?;
        }
    }
    Ok(0)
}

fn cmd_iterations(config: &ExperimentConfig) -> Result<u8, Error> {
    let case = ManufacturedCase::for_dim(config.dim)?;
    let mut failed = false;
    for &precond in &config.preconds {
        let solver = config.solver.unwrap_or_else(|| precond.default_solver());
        let rows = run_iterations(case, config, solver, precond)?;
        failed |= rows.iter().any(|r| !r.converged);
        let csv = iterations_csv(&rows);
        println!(
            "# iterations dim={} solver={} precond={}",
            config.dim,
            solver.label(),
            precond.label()
        );
        print!("{csv}");
        if let Some(dir) = &config.out_dir {
            write_output(
                dir,
                &format!("iterations_{}d_{}_{}.csv", config.dim, solver.label(), precond.label()),
                &csv,
            )?;
        }
    }
    Ok(if failed { 3 } else { 0 })
}

fn cmd_spectrum(config: &ExperimentConfig) -> Result<u8, Error> {
    let case = ManufacturedCase::for_dim(config.dim)?;
    if let Some(dir) = &config.out_dir {
        std::fs::create_dir_all(dir)?;
    }
    let (cells, summary, any_violation) = run_spectrum(case, config)?;
    for cell in &cells {
        println!(
            "n={} mu={} d11={} beta={:.6} gamma_max={:.6} schur_lambda1={:.6e} violations={}",
            cell.level,
            cell.mu,
            cell.d11.label(),
            cell.report.beta,
            cell.report.gamma_max,
            cell.schur_lambda1,
            cell.report.violations.len()
        );
    }
    print!("{summary}");
    if let Some(dir) = &config.out_dir {
        write_output(dir, "bounds_summary.txt", &summary)?;
    }
    Ok(if any_violation { 2 } else { 0 })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let args = match &cli.command {
        Command::Solve(a)
        | Command::Convergence(a)
        | Command::Iterations(a)
        | Command::Spectrum(a) => a,
    };
    let config = match resolve(args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let result = match &cli.command {
        Command::Solve(_) => cmd_solve(&config),
        Command::Convergence(_) => cmd_convergence(&config),
        Command::Iterations(_) => cmd_iterations(&config),
        Command::Spectrum(_) => cmd_spectrum(&config),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Error::SolverFailed { iterations, residual }) => {
            eprintln!("error: solver failed after {iterations} iterations (residual {residual:.3e})");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
