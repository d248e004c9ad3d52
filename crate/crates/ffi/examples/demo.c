/* Minimal C consumer of the wg-stokes ABI: assemble the 2D manufactured
 * problem, solve with MINRES + block diagonal preconditioning, print the
 * report. Build (from the workspace root, after `cargo build --release`):
 *
 *   cc crates/ffi/examples/demo.c -Icrates/ffi/include \
 *      -Ltarget/release -lwg_stokes_ffi -lm -lpthread -ldl -o wg_demo
 */
#include <stdio.h>

#include "wg_stokes.h"

int main(void) {
    WgProblem *problem = NULL;
    WgStatus status = wg_problem_create(2, 8, 1e-4, 0, &problem);
    if (status != WgStatusOk) {
        fprintf(stderr, "create failed: %s\n", wg_status_message(status));
        return 1;
    }
    printf("elements=%zu unknowns=%zu |K1|=%g\n",
           (size_t)wg_problem_n_elements(problem),
           (size_t)wg_problem_n_unknowns(problem),
           wg_problem_k1_measure(problem));

    double beta = 0.0;
    if (wg_problem_infsup_beta(problem, &beta) == WgStatusOk) {
        printf("beta=%.6f\n", beta);
    }

    WgSolveOptions opts = wg_solve_options_default(2);
    WgSolveReport report;
    status = wg_problem_solve(problem, &opts, &report);
    printf("status=%s iterations=%zu converged=%d true_residual=%.3e\n",
           wg_status_message(status), (size_t)report.iterations,
           report.converged, report.final_true_residual);
    printf("err_p=%.6e err_grad=%.6e err_proj=%.6e pinned=%.3e\n", report.err_p,
           report.err_grad, report.err_proj, report.pinned_pressure);

    wg_problem_free(problem);
    return status == WgStatusOk ? 0 : 1;
}
