//! Manufactured-solution studies behind the CLI: convergence tables,
//! iteration-count tables across viscosity / regularization / mesh level,
//! and spectral bound reports.

use std::fmt::Write as FmtWrite;
use std::fs;
use std::path::{Path, PathBuf};

use crate::assembly::{assemble, compute_errors, ErrorNorms, WgSolution, WgSpace};
use crate::error::{Error, Result};
use crate::krylov::{
    gmres, minres, BlockSchurPrecond, InnerSolve, PrecondKind, PrecondSide, Sign, SolveReport,
};
use crate::mesh::generate_structured_mesh;
use crate::spectral::{eig_diag_preconditioned, eig_schur, infsup_beta, write_bound_summary,
    write_eigenvalue_csv, SpectralReport};
use crate::system::{regularize_and_scale, D11Mode, RegularizedSystem};

/// The two manufactured Stokes problems used throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ManufacturedCase {
    /// Unit square; velocity built from `e^x (y cos y + sin y)` terms.
    Stokes2d,
    /// Unit cube; velocity built from `sin(pi x)` columns.
    Stokes3d,
}

impl ManufacturedCase {
    pub fn for_dim(dim: usize) -> Result<Self> {
        match dim {
            2 => Ok(ManufacturedCase::Stokes2d),
            3 => Ok(ManufacturedCase::Stokes3d),
            _ => Err(Error::InvalidDimension(dim)),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ManufacturedCase::Stokes2d => 2,
            ManufacturedCase::Stokes3d => 3,
        }
    }

    pub fn velocity(&self, x: &[f64; 3]) -> [f64; 3] {
        match self {
            ManufacturedCase::Stokes2d => {
                let (ex, y) = (x[0].exp(), x[1]);
                [-ex * (y * y.cos() + y.sin()), ex * y * y.sin(), 0.0]
            }
            ManufacturedCase::Stokes3d => {
                let pi = std::f64::consts::PI;
                [
                    2.0 * (pi * x[0]).sin(),
                    -pi * x[1] * (pi * x[0]).cos(),
                    -pi * x[2] * (pi * x[0]).cos(),
                ]
            }
        }
    }

    pub fn pressure(&self, x: &[f64; 3]) -> f64 {
        match self {
            ManufacturedCase::Stokes2d => 2.0 * x[0].exp() * x[1].sin(),
            ManufacturedCase::Stokes3d => {
                let pi = std::f64::consts::PI;
                (pi * x[0]).sin() * (pi * x[1]).cos() * (pi * x[2]).sin()
            }
        }
    }

    /// Jacobian of the velocity; row `m` is the gradient of component `m`.
    pub fn velocity_gradient(&self, x: &[f64; 3]) -> [[f64; 3]; 3] {
        match self {
            ManufacturedCase::Stokes2d => {
                let (ex, y) = (x[0].exp(), x[1]);
                [
                    [
                        -ex * (y * y.cos() + y.sin()),
                        -ex * (2.0 * y.cos() - y * y.sin()),
                        0.0,
                    ],
                    [ex * y * y.sin(), ex * (y.sin() + y * y.cos()), 0.0],
                    [0.0, 0.0, 0.0],
                ]
            }
            ManufacturedCase::Stokes3d => {
                let pi = std::f64::consts::PI;
                let (s, c) = ((pi * x[0]).sin(), (pi * x[0]).cos());
                [
                    [2.0 * pi * c, 0.0, 0.0],
                    [pi * pi * x[1] * s, -pi * c, 0.0],
                    [pi * pi * x[2] * s, 0.0, -pi * c],
                ]
            }
        }
    }

    pub fn body_force(&self, mu: f64, x: &[f64; 3]) -> [f64; 3] {
        match self {
            ManufacturedCase::Stokes2d => {
                let (ex, y) = (x[0].exp(), x[1]);
                [
                    2.0 * (1.0 - mu) * ex * y.sin(),
                    2.0 * (1.0 - mu) * ex * y.cos(),
                    0.0,
                ]
            }
            ManufacturedCase::Stokes3d => {
                let pi = std::f64::consts::PI;
                let (sx, cx) = ((pi * x[0]).sin(), (pi * x[0]).cos());
                let (sy, cy) = ((pi * x[1]).sin(), (pi * x[1]).cos());
                let (sz, cz) = ((pi * x[2]).sin(), (pi * x[2]).cos());
                [
                    2.0 * mu * pi * pi * sx + pi * cx * cy * sz,
                    -mu * pi.powi(3) * x[1] * cx - pi * sy * sx * sz,
                    -mu * pi.powi(3) * x[2] * cx + pi * sx * cy * cz,
                ]
            }
        }
    }
}

/// Which Krylov method drives the outer iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Minres,
    Gmres,
}

impl SolverKind {
    pub fn label(&self) -> &'static str {
        match self {
            SolverKind::Minres => "minres",
            SolverKind::Gmres => "gmres",
        }
    }
}

/// Preconditioner selection, CLI-facing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrecondChoice {
    Pd,
    PlMinus,
    PlPlus,
    PuMinus,
    PuPlus,
}

impl PrecondChoice {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "pd" => Ok(PrecondChoice::Pd),
            "pl-" => Ok(PrecondChoice::PlMinus),
            "pl+" => Ok(PrecondChoice::PlPlus),
            "pu-" => Ok(PrecondChoice::PuMinus),
            "pu+" => Ok(PrecondChoice::PuPlus),
            other => Err(Error::Config(format!("unknown preconditioner '{other}'"))),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            PrecondChoice::Pd => "pd",
            PrecondChoice::PlMinus => "pl-",
            PrecondChoice::PlPlus => "pl+",
            PrecondChoice::PuMinus => "pu-",
            PrecondChoice::PuPlus => "pu+",
        }
    }

    pub fn kind_sign(&self) -> (PrecondKind, Sign) {
        match self {
            PrecondChoice::Pd => (PrecondKind::BlockDiag, Sign::Plus),
            PrecondChoice::PlMinus => (PrecondKind::BlockLower, Sign::Minus),
            PrecondChoice::PlPlus => (PrecondKind::BlockLower, Sign::Plus),
            PrecondChoice::PuMinus => (PrecondKind::BlockUpper, Sign::Minus),
            PrecondChoice::PuPlus => (PrecondKind::BlockUpper, Sign::Plus),
        }
    }

    /// Default pairing: MINRES for the SPD diagonal preconditioner, GMRES
    /// for the triangular ones.
    pub fn default_solver(&self) -> SolverKind {
        match self {
            PrecondChoice::Pd => SolverKind::Minres,
            _ => SolverKind::Gmres,
        }
    }

    /// Upper-triangular preconditioners follow the right-preconditioned
    /// formulation; the rest are applied on the left.
    pub fn side(&self) -> PrecondSide {
        match self {
            PrecondChoice::PuMinus | PrecondChoice::PuPlus => PrecondSide::Right,
            _ => PrecondSide::Left,
        }
    }
}

/// Full experiment configuration; defaults reproduce the reference setup
/// (tolerance 1e-9 in 2D / 1e-8 in 3D, restart 30, at most 1000 iterations,
/// viscosities 1 and 1e-4, both regularization weights).
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub dim: usize,
    pub levels: Vec<usize>,
    pub mu_list: Vec<f64>,
    pub d11_modes: Vec<D11Mode>,
    pub preconds: Vec<PrecondChoice>,
    pub solver: Option<SolverKind>,
    pub tol: f64,
    pub restart: usize,
    pub maxit: usize,
    pub inner: InnerSolve,
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn defaults(dim: usize) -> Result<ExperimentConfig> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidDimension(dim));
        }
        Ok(ExperimentConfig {
            dim,
            levels: if dim == 2 { vec![4, 8, 16, 32] } else { vec![2, 4, 8] },
            mu_list: vec![1.0, 1e-4],
            d11_modes: vec![D11Mode::One, D11Mode::CellMeasure],
            preconds: vec![PrecondChoice::Pd, PrecondChoice::PlMinus],
            solver: None,
            tol: if dim == 2 { 1e-9 } else { 1e-8 },
            restart: 30,
            maxit: 1000,
            inner: InnerSolve::Direct,
            out_dir: None,
        })
    }
}

/// Assembles and regularizes the manufactured problem at one level.
pub fn build_problem(
    case: ManufacturedCase,
    n: usize,
    mu: f64,
    mode: D11Mode,
) -> Result<(WgSpace, RegularizedSystem)> {
    let mesh = generate_structured_mesh(case.dim(), n)?;
    let (space, blocks) = assemble(
        &mesh,
        mu,
        |x| case.body_force(mu, x),
        |x| case.velocity(x),
    )?;
    let sys = regularize_and_scale(blocks, mu, mode)?;
    Ok((space, sys))
}

/// Runs the configured solver on a system; returns the rescaled solution
/// vector and the report.
pub fn run_solver(
    sys: &RegularizedSystem,
    solver: SolverKind,
    precond: PrecondChoice,
    inner: InnerSolve,
    tol: f64,
    restart: usize,
    maxit: usize,
) -> Result<(Vec<f64>, SolveReport)> {
    let (kind, sign) = precond.kind_sign();
    let p = BlockSchurPrecond::new(sys, kind, sign, inner)?;
    let b = sys.rhs();
    match solver {
        SolverKind::Minres => minres(sys, &p, &b, tol, maxit),
        SolverKind::Gmres => gmres(sys, &p, precond.side(), &b, restart, tol, maxit),
    }
}

/// One row of a convergence table.
#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub level: usize,
    pub h: f64,
    pub errors: ErrorNorms,
    /// log2 ratios against the previous level (None on the first row).
    pub orders: Option<[f64; 4]>,
}

/// Manufactured-solution convergence study at fixed viscosity.
pub fn run_convergence(
    case: ManufacturedCase,
    levels: &[usize],
    mu: f64,
    tol: f64,
    maxit: usize,
    inner: InnerSolve,
) -> Result<Vec<ConvergenceRow>> {
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for &n in levels {
        let (space, sys) = build_problem(case, n, mu, D11Mode::CellMeasure)?;
        let (x, report) = run_solver(
            &sys,
            SolverKind::Minres,
            PrecondChoice::Pd,
            inner,
            tol,
            30,
            maxit,
        )?;
        if !report.converged {
            return Err(Error::SolverFailed {
                iterations: report.iterations,
                residual: report.final_residual(),
            });
        }
        let solution = sys.unscale(&x)?;
        let mesh = generate_structured_mesh(case.dim(), n)?;
        let errors = compute_errors(
            &mesh,
            &space,
            &solution,
            |x| case.velocity(x),
            |x| case.velocity_gradient(x),
            |x| case.pressure(x),
        )?;
        let orders = rows.last().map(|prev: &ConvergenceRow| {
            let r = |e0: f64, e1: f64| (e0 / e1).log2() / (n as f64 / prev.level as f64).log2();
            [
                r(prev.errors.err_p, errors.err_p),
                r(prev.errors.err_grad, errors.err_grad),
                r(prev.errors.err_u0, errors.err_u0),
                r(prev.errors.err_proj, errors.err_proj),
            ]
        });
        rows.push(ConvergenceRow { level: n, h: 1.0 / n as f64, errors, orders });
    }
    Ok(rows)
}

/// CSV with schema `level,h,err_p,order_p,err_grad,order_grad,err_u0,order_u0,err_proj,order_proj`.
pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from(
        "level,h,err_p,order_p,err_grad,order_grad,err_u0,order_u0,err_proj,order_proj\n",
    );
    for row in rows {
        let ord = |i: usize| match &row.orders {
            Some(o) => format!("{:.6}", o[i]),
            None => String::new(),
        };
        writeln!(
            out,
            "{},{:.12e},{:.12e},{},{:.12e},{},{:.12e},{},{:.12e},{}",
            row.level,
            row.h,
            row.errors.err_p,
            ord(0),
            row.errors.err_grad,
            ord(1),
            row.errors.err_u0,
            ord(2),
            row.errors.err_proj,
            ord(3),
        )
        .expect("string write");
    }
    out
}

/// One cell of an iteration-count table.
#[derive(Debug, Clone)]
pub struct IterationRow {
    pub d11: D11Mode,
    pub mu: f64,
    pub level: usize,
    pub n_elements: usize,
    pub n_unknowns: usize,
    pub iters: usize,
    pub converged: bool,
    pub final_true_residual: f64,
}

/// Iteration-count study for one (solver, preconditioner) pair.
pub fn run_iterations(
    case: ManufacturedCase,
    config: &ExperimentConfig,
    solver: SolverKind,
    precond: PrecondChoice,
) -> Result<Vec<IterationRow>> {
    let mut rows = Vec::new();
    for &mode in &config.d11_modes {
        for &mu in &config.mu_list {
            for &n in &config.levels {
                let (space, sys) = build_problem(case, n, mu, mode)?;
                let (_, report) = run_solver(
                    &sys,
                    solver,
                    precond,
                    config.inner,
                    config.tol,
                    config.restart,
                    config.maxit,
                )?;
                rows.push(IterationRow {
                    d11: mode,
                    mu,
                    level: n,
                    n_elements: space.n_elements,
                    n_unknowns: space.n_total(),
                    iters: report.iterations,
                    converged: report.converged,
                    final_true_residual: report.final_true_residual(),
                });
            }
        }
    }
    Ok(rows)
}

/// CSV with schema `d11,mu,level,n_elements,n_unknowns,iters,converged,final_true_residual`.
pub fn iterations_csv(rows: &[IterationRow]) -> String {
    let mut out =
        String::from("d11,mu,level,n_elements,n_unknowns,iters,converged,final_true_residual\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{:.12e}",
            r.d11.label(),
            r.mu,
            r.level,
            r.n_elements,
            r.n_unknowns,
            r.iters,
            r.converged,
            r.final_true_residual,
        )
        .expect("string write");
    }
    out
}

/// Outcome of the spectrum study for one configuration cell.
#[derive(Debug, Clone)]
pub struct SpectrumCell {
    pub level: usize,
    pub mu: f64,
    pub d11: D11Mode,
    pub schur_lambda1: f64,
    pub report: SpectralReport,
}

/// Spectral study: eigenvalue CSVs plus a bound-check summary. Returns the
/// cells and whether any bound was violated.
pub fn run_spectrum(
    case: ManufacturedCase,
    config: &ExperimentConfig,
) -> Result<(Vec<SpectrumCell>, String, bool)> {
    let mut cells = Vec::new();
    let mut summary = String::new();
    let mut any_violation = false;
    for &mode in &config.d11_modes {
        for &mu in &config.mu_list {
            for &n in &config.levels {
                let (_, sys) = build_problem(case, n, mu, mode)?;
                let infsup = infsup_beta(&sys)?;
                let schur = eig_schur(&sys)?;
                let diag = eig_diag_preconditioned(&sys)?;
                let label = format!("n={} mu={} d11={}", n, mu, mode.label());
                let mut buf = Vec::new();
                write_bound_summary(&mut buf, &format!("schur {label}"), &schur.violations)?;
                write_bound_summary(&mut buf, &format!("diag-precond {label}"), &diag.violations)?;
                summary.push_str(std::str::from_utf8(&buf).unwrap());
                any_violation |= !schur.violations.is_empty() || !diag.violations.is_empty();

                if let Some(dir) = &config.out_dir {
                    let tag = format!("{}_n{}_mu{}_d11{}", case.dim(), n, mu, mode.label());
                    let mut f = fs::File::create(dir.join(format!("schur_eigs_{tag}.csv")))?;
                    write_eigenvalue_csv(&mut f, &schur.eigenvalues)?;
                    let mut f = fs::File::create(dir.join(format!("pd_eigs_{tag}.csv")))?;
                    write_eigenvalue_csv(&mut f, &diag.eigenvalues)?;
                }
                let mut violations = schur.violations.clone();
                violations.extend(diag.violations.iter().cloned());
                let report = SpectralReport {
                    beta: infsup.beta,
                    gamma_min_pos: infsup.gammas[1],
                    gamma_max: *infsup.gammas.last().unwrap(),
                    lambda1_mu: Some(diag.lambda1_mu),
                    intervals: vec![
                        diag.regions[0],
                        diag.regions[1],
                        schur.lambda1_interval,
                        schur.cluster_interval,
                    ],
                    violations,
                };
                cells.push(SpectrumCell {
                    level: n,
                    mu,
                    d11: mode,
                    schur_lambda1: schur.lambda1,
                    report,
                });
            }
        }
    }
    Ok((cells, summary, any_violation))
}

/// Writes text to `dir/name`, creating the directory first.
pub fn write_output(dir: &Path, name: &str, contents: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), contents)?;
    Ok(())
}

/// Solution vector convenience used by `solve` and tests.
pub fn solve_to_solution(
    sys: &RegularizedSystem,
    solver: SolverKind,
    precond: PrecondChoice,
    inner: InnerSolve,
    tol: f64,
    restart: usize,
    maxit: usize,
) -> Result<(WgSolution, SolveReport)> {
    let (x, report) = run_solver(sys, solver, precond, inner, tol, restart, maxit)?;
    Ok((sys.unscale(&x)?, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Spot-check that the stated body force is the Stokes residual of the
    /// manufactured pair: `-mu Δu + ∇p = f` and `∇·u = 0`, via central
    /// finite differences at scattered points.
    #[test]
    fn manufactured_cases_satisfy_stokes_equations() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed_0401);
        let h = 1e-5;
        for case in [ManufacturedCase::Stokes2d, ManufacturedCase::Stokes3d] {
            let d = case.dim();
            for &mu in &[1.0, 1e-4] {
                for _ in 0..20 {
                    let mut x = [0.0; 3];
                    for c in x.iter_mut().take(d) {
                        *c = rng.gen_range(0.1..0.9);
                    }
                    // Laplacian and divergence by central differences.
                    let mut lap = [0.0; 3];
                    let mut div = 0.0;
                    let u0 = case.velocity(&x);
                    for c in 0..d {
                        let mut xp = x;
                        xp[c] += h;
                        let mut xm = x;
                        xm[c] -= h;
                        let up = case.velocity(&xp);
                        let um = case.velocity(&xm);
                        for m in 0..d {
                            lap[m] += (up[m] - 2.0 * u0[m] + um[m]) / (h * h);
                        }
                        div += (up[c] - um[c]) / (2.0 * h);
                    }
                    let mut grad_p = [0.0; 3];
                    for c in 0..d {
                        let mut xp = x;
                        xp[c] += h;
                        let mut xm = x;
                        xm[c] -= h;
                        grad_p[c] = (case.pressure(&xp) - case.pressure(&xm)) / (2.0 * h);
                    }
                    let f = case.body_force(mu, &x);
                    for m in 0..d {
                        let lhs = -mu * lap[m] + grad_p[m];
                        assert!(
                            (lhs - f[m]).abs() < 1e-4 * (1.0 + f[m].abs()),
                            "{case:?} mu={mu}: component {m}: {lhs} vs {}",
                            f[m]
                        );
                    }
                    assert!(div.abs() < 1e-6, "{case:?}: divergence {div}");
                }
            }
        }
    }

    /// The analytic Jacobian matches finite differences.
    #[test]
    fn velocity_gradient_matches_finite_differences() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed_0402);
        let h = 1e-6;
        for case in [ManufacturedCase::Stokes2d, ManufacturedCase::Stokes3d] {
            let d = case.dim();
            for _ in 0..20 {
                let mut x = [0.0; 3];
                for c in x.iter_mut().take(d) {
                    *c = rng.gen_range(0.1..0.9);
                }
                let jac = case.velocity_gradient(&x);
                for c in 0..d {
                    let mut xp = x;
                    xp[c] += h;
                    let mut xm = x;
                    xm[c] -= h;
                    let up = case.velocity(&xp);
                    let um = case.velocity(&xm);
                    for m in 0..d {
                        let fd = (up[m] - um[m]) / (2.0 * h);
                        assert!(
                            (jac[m][c] - fd).abs() < 1e-6 * (1.0 + fd.abs()),
                            "{case:?} d{m}/d{c}: {} vs {fd}",
                            jac[m][c]
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn csv_schemas_are_stable() {
        let rows = vec![ConvergenceRow {
            level: 8,
            h: 0.125,
            errors: ErrorNorms { err_p: 1.0, err_grad: 2.0, err_u0: 3.0, err_proj: 4.0 },
            orders: None,
        }];
        let csv = convergence_csv(&rows);
        assert!(csv.starts_with(
            "level,h,err_p,order_p,err_grad,order_grad,err_u0,order_u0,err_proj,order_proj"
        ));
        let irows = vec![IterationRow {
            d11: D11Mode::One,
            mu: 1.0,
            level: 8,
            n_elements: 128,
            n_unknowns: 736,
            iters: 42,
            converged: true,
            final_true_residual: 1e-10,
        }];
        let icsv = iterations_csv(&irows);
        assert!(icsv.starts_with("d11,mu,level,n_elements,n_unknowns,iters,converged,final_true_residual"));
        assert!(icsv.contains("one,1,8,128,736,42,true,"));
    }
}
