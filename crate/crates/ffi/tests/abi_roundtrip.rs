//! Exercises the C ABI through the exported symbols, and checks that the
//! generated header is valid C.

use std::ffi::CStr;
use std::ptr;

use wg_stokes_ffi::*;

#[test]
fn create_solve_free_roundtrip() {
    unsafe {
        let mut problem: *mut WgProblem = ptr::null_mut();
        let status = wg_problem_create(2, 8, 1.0, 0, &mut problem);
        assert_eq!(status, WgStatus::WgStatusOk);
        assert!(!problem.is_null());
        assert_eq!(wg_problem_n_elements(problem), 128);
        assert_eq!(wg_problem_n_unknowns(problem), 736);
        assert!((wg_problem_k1_measure(problem) - 1.0 / 128.0).abs() < 1e-15);

        let mut beta = 0.0;
        assert_eq!(wg_problem_infsup_beta(problem, &mut beta), WgStatus::WgStatusOk);
        assert!(beta > 0.4 && beta < 0.8, "beta = {beta}");

        let opts = wg_solve_options_default(2);
        let mut report = std::mem::zeroed::<WgSolveReport>();
        let status = wg_problem_solve(problem, &opts, &mut report);
        assert_eq!(status, WgStatus::WgStatusOk);
        assert_eq!(report.converged, 1);
        assert!(report.iterations > 10 && report.iterations < 300);
        assert!(report.final_preconditioned_residual <= opts.tol);
        assert!(report.err_p > 0.0 && report.err_p < 1.0);
        assert!(report.pinned_pressure.abs() < 1e-7);

        // GMRES with the lower triangular preconditioner converges in fewer
        // outer iterations.
        let mut gopts = opts;
        gopts.solver = WgSolver::WgSolverGmres;
        gopts.precond = WgPrecond::WgPrecondLowerMinus;
        let mut greport = std::mem::zeroed::<WgSolveReport>();
        assert_eq!(wg_problem_solve(problem, &gopts, &mut greport), WgStatus::WgStatusOk);
        assert!(greport.iterations < report.iterations);

        wg_problem_free(problem);
    }
}

#[test]
fn invalid_arguments_are_rejected() {
    unsafe {
        let mut problem: *mut WgProblem = ptr::null_mut();
        assert_eq!(
            wg_problem_create(5, 4, 1.0, 0, &mut problem),
            WgStatus::WgStatusInvalidArgument
        );
        assert!(problem.is_null());
        assert_eq!(
            wg_problem_create(2, 0, 1.0, 0, &mut problem),
            WgStatus::WgStatusInvalidArgument
        );
        assert_eq!(
            wg_problem_create(2, 4, -1.0, 0, &mut problem),
            WgStatus::WgStatusInvalidArgument
        );
        assert_eq!(wg_problem_create(2, 4, 1.0, 0, ptr::null_mut()), WgStatus::WgStatusNullPointer);

        let status = wg_problem_create(2, 4, 1.0, 0, &mut problem);
        assert_eq!(status, WgStatus::WgStatusOk);
        let mut opts = wg_solve_options_default(2);
        opts.tol = -1.0;
        let mut report = std::mem::zeroed::<WgSolveReport>();
        assert_eq!(
            wg_problem_solve(problem, &opts, &mut report),
            WgStatus::WgStatusInvalidArgument
        );
        assert_eq!(
            wg_problem_solve(ptr::null(), &opts, &mut report),
            WgStatus::WgStatusNullPointer
        );
        wg_problem_free(problem);
        wg_problem_free(ptr::null_mut());
    }
}

#[test]
fn non_convergence_reports_solver_failure() {
    unsafe {
        let mut problem: *mut WgProblem = ptr::null_mut();
        assert_eq!(wg_problem_create(2, 8, 1.0, 0, &mut problem), WgStatus::WgStatusOk);
        let mut opts = wg_solve_options_default(2);
        opts.maxit = 3;
        let mut report = std::mem::zeroed::<WgSolveReport>();
        let status = wg_problem_solve(problem, &opts, &mut report);
        assert_eq!(status, WgStatus::WgStatusSolverFailure);
        assert_eq!(report.converged, 0);
        assert_eq!(report.iterations, 3);
        wg_problem_free(problem);
    }
}

#[test]
fn status_messages_are_c_strings() {
    for status in [
        WgStatus::WgStatusOk,
        WgStatus::WgStatusInvalidArgument,
        WgStatus::WgStatusNullPointer,
        WgStatus::WgStatusSolverFailure,
        WgStatus::WgStatusNumericalError,
        WgStatus::WgStatusInternalError,
    ] {
        let msg = wg_status_message(status);
        assert!(!msg.is_null());
        let text = unsafe { CStr::from_ptr(msg) }.to_str().unwrap();
        assert!(!text.is_empty());
    }
}

/// The generated header must be self-contained valid C (and C++).
#[test]
fn generated_header_compiles_as_c() {
    let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("include/wg_stokes.h");
    assert!(header.exists(), "header not generated at {}", header.display());
    let status = std::process::Command::new("cc")
        .args(["-std=c99", "-fsyntax-only", "-x", "c"])
        .arg(&header)
        .status()
        .expect("invoke cc");
    assert!(status.success(), "header does not compile as C99");
}
