#ifndef MUCALC_H
#define MUCALC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum {
  MUCALC_STATUS_OK = 0,
  /**
   * A passed pointer was null.
   */
  MUCALC_STATUS_NULL_ARGUMENT = 1,
  /**
   * Formula or logic tag failed to parse; see `mucalc_last_error`.
   */
  MUCALC_STATUS_PARSE_ERROR = 2,
  /**
   * Node or search budget exhausted.
   */
  MUCALC_STATUS_BUDGET_EXCEEDED = 3,
  /**
   * Invariant violation inside the solver; see `mucalc_last_error`.
   */
  MUCALC_STATUS_INTERNAL_ERROR = 4,
  /**
   * The handle is not in the right state (e.g. model before solve).
   */
  MUCALC_STATUS_INVALID_STATE = 5,
} MucalcStatus;

/**
 * Satisfiability verdicts.
 */
typedef enum {
  MUCALC_VERDICT_UNKNOWN = 0,
  MUCALC_VERDICT_SAT = 1,
  MUCALC_VERDICT_UNSAT = 2,
} MucalcVerdict;

/**
 * Opaque solver handle.
 */
typedef struct MucalcSolver MucalcSolver;

/**
 * Run statistics snapshot.
 */
typedef struct {
  uint64_t closure_size;
  uint32_t alternation_depth;
  uint64_t expanded_nodes;
  uint64_t backend_calls;
  uint64_t fixpoint_sweeps;
} MucalcStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a solver for a formula in the given logic (`rel`, `graded`,
 * `prob`, or `fusion:tag+tag`). On success writes the new handle to `out`.
 *
 * # Safety
 * `logic` and `formula` must be valid NUL-terminated UTF-8 strings and
 * `out` a valid pointer. The returned handle must be released with
 * [`mucalc_solver_free`].
 */
MucalcStatus mucalc_solver_new(const char *logic, const char *formula, MucalcSolver **out);

/**
 * Runs the decision procedure, extracting and verifying a model on SAT.
 * Safe to call repeatedly; later calls return the cached verdict.
 *
 * # Safety
 * `solver` must be a live handle from [`mucalc_solver_new`]; `verdict` must
 * be a valid pointer.
 */
MucalcStatus mucalc_solver_solve(MucalcSolver *solver, MucalcVerdict *verdict);

/**
 * Returns the extracted model in the line-oriented model format, or NULL
 * when the formula was not satisfiable (or not solved yet). The string
 * must be released with [`mucalc_string_free`].
 *
 * # Safety
 * `solver` must be a live handle.
 */
char *mucalc_solver_model(MucalcSolver *solver);

/**
 * Copies run statistics into `stats`. Valid after a successful solve.
 *
 * # Safety
 * `solver` must be a live handle; `stats` a valid pointer.
 */
MucalcStatus mucalc_solver_stats(const MucalcSolver *solver, MucalcStats *stats);

/**
 * Returns the last error message attached to the handle, or NULL. The
 * string must be released with [`mucalc_string_free`].
 *
 * # Safety
 * `solver` must be a live handle.
 */
char *mucalc_last_error(const MucalcSolver *solver);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must have been returned by a mucalc function and not freed before.
 */
void mucalc_string_free(char *s);

/**
 * Releases a solver handle.
 *
 * # Safety
 * `solver` must have been returned by [`mucalc_solver_new`] and not freed
 * before.
 */
void mucalc_solver_free(MucalcSolver *solver);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MUCALC_H */
