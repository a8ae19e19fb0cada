#ifndef FBSDE_H
#define FBSDE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes returned by every function.
 */
typedef enum FbsdeStatus {
  FBSDE_STATUS_OK = 0,
  FBSDE_STATUS_NULL_POINTER = 1,
  FBSDE_STATUS_INVALID_ARGUMENT = 2,
  FBSDE_STATUS_NUMERICAL = 3,
  FBSDE_STATUS_IO = 4,
  FBSDE_STATUS_PANIC = 5,
} FbsdeStatus;

/**
 * An FBSDE problem definition.
 */
typedef struct FbsdeProblem FbsdeProblem;

/**
 * A convergence study result.
 */
typedef struct FbsdeReport FbsdeReport;

/**
 * Discretization parameters; start from [`fbsde_params_default`].
 */
typedef struct FbsdeParams {
  double alpha;
  uint32_t quadrature_order;
  double halfwidth_sigmas;
  /**
   * Odd, at least 5.
   */
  uint32_t grid_points;
} FbsdeParams;

/**
 * Coefficient callbacks for a user-defined problem. All functions receive
 * `user_data` first and may be called concurrently from several threads.
 */
typedef struct FbsdeCallbacks {
  void *user_data;
  double (*drift)(void*, double, double);
  double (*diffusion)(void*, double, double);
  double (*generator)(void*, double, double, double);
  double (*terminal_y)(void*, double);
  double (*terminal_z)(void*, double);
} FbsdeCallbacks;

/**
 * `(Y, Z)` at `(0, x0)`. Errors are NaN when the problem has no exact
 * solution.
 */
typedef struct FbsdeSolution {
  double y0;
  double z0;
  double err_y;
  double err_z;
  uint64_t out_of_domain;
  double wall_time_seconds;
} FbsdeSolution;

typedef struct FbsdeReportRow {
  uint64_t steps;
  double h;
  double err_y;
  double err_z;
  double wall_time_seconds;
} FbsdeReportRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty if none. The
 * pointer stays valid until the next failing call on this thread.
 */
const char *fbsde_last_error(void);

struct FbsdeParams fbsde_params_default(void);

/**
 * Logistic test problem with closed-form solution, `X = W` on `[0, 1]`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum FbsdeStatus fbsde_problem_example1(struct FbsdeProblem **out);

/**
 * FitzHugh-Nagumo type problem with parameter `a`, started at `x0`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum FbsdeStatus fbsde_problem_example2(double a, double x0, struct FbsdeProblem **out);

/**
 * Problem defined by C callbacks. It has no exact solution, so it can be
 * solved but not used in a convergence study.
 *
 * # Safety
 * `callbacks` and `out` must be valid pointers; the callbacks and
 * `user_data` must stay valid and thread-safe until the problem is freed.
 */
enum FbsdeStatus fbsde_problem_from_callbacks(const struct FbsdeCallbacks *callbacks,
                                              double terminal_time,
                                              double x0,
                                              struct FbsdeProblem **out);

/**
 * # Safety
 * `problem` must come from an `fbsde_problem_*` constructor or be null.
 */
void fbsde_problem_free(struct FbsdeProblem *problem);

/**
 * Runs the backward recursion with `steps` time steps.
 *
 * # Safety
 * All pointers must be valid.
 */
enum FbsdeStatus fbsde_solve(const struct FbsdeProblem *problem,
                             const struct FbsdeParams *params,
                             uint32_t steps,
                             struct FbsdeSolution *out);

/**
 * Convergence study over the `n_steps` step counts in `steps`.
 *
 * # Safety
 * `steps` must point to `n_steps` values; other pointers must be valid.
 */
enum FbsdeStatus fbsde_convergence_study(const struct FbsdeProblem *problem,
                                         const struct FbsdeParams *params,
                                         const uint32_t *steps,
                                         uintptr_t n_steps,
                                         struct FbsdeReport **out);

/**
 * # Safety
 * `report` must be a valid report handle or null.
 */
uintptr_t fbsde_report_len(const struct FbsdeReport *report);

/**
 * # Safety
 * `report` and `out` must be valid pointers.
 */
enum FbsdeStatus fbsde_report_row(const struct FbsdeReport *report,
                                  uintptr_t index,
                                  struct FbsdeReportRow *out);

/**
 * Fitted convergence rates; NaN when every error sits at the round-off
 * floor.
 *
 * # Safety
 * All pointers must be valid.
 */
enum FbsdeStatus fbsde_report_rates(const struct FbsdeReport *report, double *cr_y, double *cr_z);

/**
 * Writes the report as CSV to `path` (UTF-8). With `record_runtime == 0`
 * the runtime column is written as `NA`.
 *
 * # Safety
 * `report` must be valid and `path` a NUL-terminated string.
 */
enum FbsdeStatus fbsde_report_write_csv(const struct FbsdeReport *report,
                                        const char *path,
                                        int32_t record_runtime);

/**
 * # Safety
 * `report` must come from [`fbsde_convergence_study`] or be null.
 */
void fbsde_report_free(struct FbsdeReport *report);

/**
 * Least-squares slope of `ln err` against `ln h`.
 *
 * # Safety
 * `hs` and `errs` must point to `n` values; `out` must be valid.
 */
enum FbsdeStatus fbsde_convergence_rate(const double *hs,
                                        const double *errs,
                                        uintptr_t n,
                                        double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FBSDE_H */
