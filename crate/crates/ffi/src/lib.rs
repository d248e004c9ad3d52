//! C ABI for the WG Stokes solver: opaque problem handles, plain-old-data
//! option/report structs and integer status codes. The header is generated
//! into `include/wg_stokes.h` at build time.
//!
//! Every function is panic-safe: internal panics surface as
//! `WG_STATUS_INTERNAL_ERROR` instead of unwinding across the boundary.

use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use wg_stokes::assembly::compute_errors;
use wg_stokes::experiments::{
    build_problem, run_solver, ManufacturedCase, PrecondChoice, SolverKind,
};
use wg_stokes::krylov::InnerSolve;
use wg_stokes::mesh::{generate_structured_mesh, Mesh};
use wg_stokes::system::{D11Mode, RegularizedSystem};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WgStatus {
    WgStatusOk = 0,
    WgStatusInvalidArgument = 1,
    WgStatusNullPointer = 2,
    WgStatusSolverFailure = 3,
    WgStatusNumericalError = 4,
    WgStatusInternalError = 5,
}

/// Krylov method selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WgSolver {
    WgSolverMinres = 0,
    WgSolverGmres = 1,
}

/// Block Schur complement preconditioner selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WgPrecond {
    WgPrecondDiag = 0,
    WgPrecondLowerMinus = 1,
    WgPrecondLowerPlus = 2,
    WgPrecondUpperMinus = 3,
    WgPrecondUpperPlus = 4,
}

/// Solver options; obtain defaults from `wg_solve_options_default`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct WgSolveOptions {
    pub solver: WgSolver,
    pub precond: WgPrecond,
    /// Relative residual tolerance.
    pub tol: f64,
    /// GMRES restart length.
    pub restart: usize,
    pub maxit: usize,
    /// Nonzero: solve the velocity block by PCG with an incomplete Cholesky
    /// preconditioner instead of the sparse direct factorization.
    pub use_pcg_inner: i32,
    pub pcg_droptol: f64,
    pub pcg_tol: f64,
}

/// Outcome of one solve, including discretization errors against the
/// manufactured solution.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct WgSolveReport {
    pub iterations: usize,
    pub inner_iterations: usize,
    pub converged: i32,
    pub stagnated: i32,
    pub final_preconditioned_residual: f64,
    pub final_true_residual: f64,
    pub err_p: f64,
    pub err_grad: f64,
    pub err_u0: f64,
    pub err_proj: f64,
    /// Solved pressure at the pinned element.
    pub pinned_pressure: f64,
}

/// Opaque handle: an assembled, regularized manufactured Stokes problem.
pub struct WgProblem {
    case: ManufacturedCase,
    mesh: Mesh,
    space: wg_stokes::assembly::WgSpace,
    system: RegularizedSystem,
}

fn status_of(err: &wg_stokes::Error) -> WgStatus {
    use wg_stokes::Error::*;
    match err {
        InvalidSubdivisions | InvalidDimension(_) | InvalidRegularization(_)
        | InvalidViscosity(_) | ZeroViscosity(_) | Config(_) | UnknownQuadratureDegree { .. } => {
            WgStatus::WgStatusInvalidArgument
        }
        SolverFailed { .. } | InnerSolveFailed { .. } => WgStatus::WgStatusSolverFailure,
        _ => WgStatus::WgStatusNumericalError,
    }
}

/// Human-readable description of a status code (static storage).
#[no_mangle]
pub extern "C" fn wg_status_message(status: WgStatus) -> *const c_char {
    let msg: &'static [u8] = match status {
        WgStatus::WgStatusOk => b"ok\0",
        WgStatus::WgStatusInvalidArgument => b"invalid argument\0",
        WgStatus::WgStatusNullPointer => b"null pointer\0",
        WgStatus::WgStatusSolverFailure => b"solver did not converge\0",
        WgStatus::WgStatusNumericalError => b"numerical failure\0",
        WgStatus::WgStatusInternalError => b"internal error\0",
    };
    msg.as_ptr() as *const c_char
}

/// Default options for the given dimension: MINRES with the block diagonal
/// preconditioner, direct inner solves, tolerance 1e-9 (2D) or 1e-8 (3D),
/// restart 30, at most 1000 iterations.
#[no_mangle]
pub extern "C" fn wg_solve_options_default(dim: u32) -> WgSolveOptions {
    WgSolveOptions {
        solver: WgSolver::WgSolverMinres,
        precond: WgPrecond::WgPrecondDiag,
        tol: if dim == 3 { 1e-8 } else { 1e-9 },
        restart: 30,
        maxit: 1000,
        use_pcg_inner: 0,
        pcg_droptol: 1e-3,
        pcg_tol: 1e-12,
    }
}

/// Assembles the manufactured Stokes problem on the structured mesh with
/// `level` subdivisions per axis. `d11_cell` selects the regularization
/// weight: nonzero for `d11 = |K_1|`, zero for `d11 = 1`.
///
/// # Safety
/// `out` must be a valid pointer; the handle must be released with
/// `wg_problem_free`.
#[no_mangle]
pub unsafe extern "C" fn wg_problem_create(
    dim: u32,
    level: u32,
    mu: f64,
    d11_cell: i32,
    out: *mut *mut WgProblem,
) -> WgStatus {
    if out.is_null() {
        return WgStatus::WgStatusNullPointer;
    }
    *out = ptr::null_mut();
    let result = catch_unwind(|| -> Result<WgProblem, wg_stokes::Error> {
        let case = ManufacturedCase::for_dim(dim as usize)?;
        let mode = if d11_cell != 0 { D11Mode::CellMeasure } else { D11Mode::One };
        let (space, system) = build_problem(case, level as usize, mu, mode)?;
        let mesh = generate_structured_mesh(dim as usize, level as usize)?;
        Ok(WgProblem { case, mesh, space, system })
    });
    match result {
        Ok(Ok(problem)) => {
            *out = Box::into_raw(Box::new(problem));
            WgStatus::WgStatusOk
        }
        Ok(Err(e)) => status_of(&e),
        Err(_) => WgStatus::WgStatusInternalError,
    }
}

/// Releases a problem handle. Null is ignored.
///
/// # Safety
/// `problem` must come from `wg_problem_create` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn wg_problem_free(problem: *mut WgProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Number of mesh elements (also the number of pressure unknowns).
///
/// # Safety
/// `problem` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn wg_problem_n_elements(problem: *const WgProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.space.n_elements)
}

/// Total number of unknowns (velocity plus pressure).
///
/// # Safety
/// `problem` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn wg_problem_n_unknowns(problem: *const WgProblem) -> usize {
    problem.as_ref().map_or(0, |p| p.space.n_total())
}

/// Measure of the pinned element `K_1`.
///
/// # Safety
/// `problem` must be a valid handle.
#[no_mangle]
pub unsafe extern "C" fn wg_problem_k1_measure(problem: *const WgProblem) -> f64 {
    problem.as_ref().map_or(f64::NAN, |p| p.system.k1_measure())
}

/// Inf-sup constant of the discretization (dense eigensolve; coarse meshes).
///
/// # Safety
/// `problem` must be a valid handle and `beta` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn wg_problem_infsup_beta(
    problem: *const WgProblem,
    beta: *mut f64,
) -> WgStatus {
    let Some(p) = problem.as_ref() else {
        return WgStatus::WgStatusNullPointer;
    };
    if beta.is_null() {
        return WgStatus::WgStatusNullPointer;
    }
    match catch_unwind(AssertUnwindSafe(|| wg_stokes::spectral::infsup_beta(&p.system))) {
        Ok(Ok(report)) => {
            *beta = report.beta;
            WgStatus::WgStatusOk
        }
        Ok(Err(e)) => status_of(&e),
        Err(_) => WgStatus::WgStatusInternalError,
    }
}

/// Solves the problem with the given options and fills the report. A
/// non-converged run returns `WG_STATUS_SOLVER_FAILURE` with the report
/// still populated.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn wg_problem_solve(
    problem: *const WgProblem,
    options: *const WgSolveOptions,
    report: *mut WgSolveReport,
) -> WgStatus {
    let Some(p) = problem.as_ref() else {
        return WgStatus::WgStatusNullPointer;
    };
    let Some(opts) = options.as_ref() else {
        return WgStatus::WgStatusNullPointer;
    };
    if report.is_null() {
        return WgStatus::WgStatusNullPointer;
    }
    let solver = match opts.solver {
        WgSolver::WgSolverMinres => SolverKind::Minres,
        WgSolver::WgSolverGmres => SolverKind::Gmres,
    };
    let precond = match opts.precond {
        WgPrecond::WgPrecondDiag => PrecondChoice::Pd,
        WgPrecond::WgPrecondLowerMinus => PrecondChoice::PlMinus,
        WgPrecond::WgPrecondLowerPlus => PrecondChoice::PlPlus,
        WgPrecond::WgPrecondUpperMinus => PrecondChoice::PuMinus,
        WgPrecond::WgPrecondUpperPlus => PrecondChoice::PuPlus,
    };
    let inner = if opts.use_pcg_inner != 0 {
        InnerSolve::Pcg { droptol: opts.pcg_droptol, tol: opts.pcg_tol }
    } else {
        InnerSolve::Direct
    };
    if opts.tol <= 0.0 || opts.tol.is_nan() || opts.maxit == 0 || opts.restart == 0 {
        return WgStatus::WgStatusInvalidArgument;
    }

    let outcome = catch_unwind(AssertUnwindSafe(|| -> Result<_, wg_stokes::Error> {
        let (x, run) = run_solver(
            &p.system,
            solver,
            precond,
            inner,
            opts.tol,
            opts.restart,
            opts.maxit,
        )?;
        let solution = p.system.unscale(&x)?;
        let case = p.case;
        let errors = compute_errors(
            &p.mesh,
            &p.space,
            &solution,
            |x| case.velocity(x),
            |x| case.velocity_gradient(x),
            |x| case.pressure(x),
        )?;
        Ok((run, solution, errors))
    }));
    match outcome {
        Ok(Ok((run, solution, errors))) => {
            *report = WgSolveReport {
                iterations: run.iterations,
                inner_iterations: run.inner_iterations_total,
                converged: run.converged as i32,
                stagnated: run.stagnated as i32,
                final_preconditioned_residual: run.final_residual(),
                final_true_residual: run.final_true_residual(),
                err_p: errors.err_p,
                err_grad: errors.err_grad,
                err_u0: errors.err_u0,
                err_proj: errors.err_proj,
                pinned_pressure: solution.pressure[0],
            };
            if run.converged {
                WgStatus::WgStatusOk
            } else {
                WgStatus::WgStatusSolverFailure
            }
        }
        Ok(Err(e)) => status_of(&e),
        Err(_) => WgStatus::WgStatusInternalError,
    }
}
