/* C interface to the wg-stokes weak Galerkin Stokes solver. */

#ifndef WG_STOKES_H
#define WG_STOKES_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Block Schur complement preconditioner selector.
 */
typedef enum WgPrecond {
  WgPrecondDiag = 0,
  WgPrecondLowerMinus = 1,
  WgPrecondLowerPlus = 2,
  WgPrecondUpperMinus = 3,
  WgPrecondUpperPlus = 4,
} WgPrecond;

/**
 * Krylov method selector.
 */
typedef enum WgSolver {
  WgSolverMinres = 0,
  WgSolverGmres = 1,
} WgSolver;

/**
 * Status codes returned by every fallible call.
 */
typedef enum WgStatus {
  WgStatusOk = 0,
  WgStatusInvalidArgument = 1,
  WgStatusNullPointer = 2,
  WgStatusSolverFailure = 3,
  WgStatusNumericalError = 4,
  WgStatusInternalError = 5,
} WgStatus;

/**
 * Opaque handle: an assembled, regularized manufactured Stokes problem.
 */
typedef struct WgProblem WgProblem;

/**
 * Solver options; obtain defaults from `wg_solve_options_default`.
 */
typedef struct WgSolveOptions {
  enum WgSolver solver;
  enum WgPrecond precond;
  /**
   * Relative residual tolerance.
   */
  double tol;
  /**
   * GMRES restart length.
   */
  uintptr_t restart;
  uintptr_t maxit;
  /**
   * Nonzero: solve the velocity block by PCG with an incomplete Cholesky
   * preconditioner instead of the sparse direct factorization.
   */
  int32_t use_pcg_inner;
  double pcg_droptol;
  double pcg_tol;
} WgSolveOptions;

/**
 * Outcome of one solve, including discretization errors against the
 * manufactured solution.
 */
typedef struct WgSolveReport {
  uintptr_t iterations;
  uintptr_t inner_iterations;
  int32_t converged;
  int32_t stagnated;
  double final_preconditioned_residual;
  double final_true_residual;
  double err_p;
  double err_grad;
  double err_u0;
  double err_proj;
  /**
   * Solved pressure at the pinned element.
   */
  double pinned_pressure;
} WgSolveReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Human-readable description of a status code (static storage).
 */
const char *wg_status_message(enum WgStatus status);

/**
 * Default options for the given dimension: MINRES with the block diagonal
 * preconditioner, direct inner solves, tolerance 1e-9 (2D) or 1e-8 (3D),
 * restart 30, at most 1000 iterations.
 */
struct WgSolveOptions wg_solve_options_default(uint32_t dim);

/**
 * Assembles the manufactured Stokes problem on the structured mesh with
 * `level` subdivisions per axis. `d11_cell` selects the regularization
 * weight: nonzero for `d11 = |K_1|`, zero for `d11 = 1`.
 *
 * # Safety
 * `out` must be a valid pointer; the handle must be released with
 * `wg_problem_free`.
 */
enum WgStatus wg_problem_create(uint32_t dim,
                                uint32_t level,
                                double mu,
                                int32_t d11_cell,
                                struct WgProblem **out);

/**
 * Releases a problem handle. Null is ignored.
 *
 * # Safety
 * `problem` must come from `wg_problem_create` and not be used afterwards.
 */
void wg_problem_free(struct WgProblem *problem);

/**
 * Number of mesh elements (also the number of pressure unknowns).
 *
 * # Safety
 * `problem` must be a valid handle.
 */
uintptr_t wg_problem_n_elements(const struct WgProblem *problem);

/**
 * Total number of unknowns (velocity plus pressure).
 *
 * # Safety
 * `problem` must be a valid handle.
 */
uintptr_t wg_problem_n_unknowns(const struct WgProblem *problem);

/**
 * Measure of the pinned element `K_1`.
 *
 * # Safety
 * `problem` must be a valid handle.
 */
double wg_problem_k1_measure(const struct WgProblem *problem);

/**
 * Inf-sup constant of the discretization (dense eigensolve; coarse meshes).
 *
 * # Safety
 * `problem` must be a valid handle and `beta` a valid pointer.
 */
enum WgStatus wg_problem_infsup_beta(const struct WgProblem *problem, double *beta);

/**
 * Solves the problem with the given options and fills the report. A
 * non-converged run returns `WG_STATUS_SOLVER_FAILURE` with the report
 * still populated.
 *
 * # Safety
 * All pointers must be valid.
 */
enum WgStatus wg_problem_solve(const struct WgProblem *problem,
                               const struct WgSolveOptions *options,
                               struct WgSolveReport *report);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* WG_STOKES_H */
