#ifndef CATCMA_H
#define CATCMA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

#define CATCMA_OK 0

/**
 * A required pointer argument was null.
 */
#define CATCMA_ERR_NULL_POINTER -1

/**
 * An argument is out of range.
 */
#define CATCMA_ERR_INVALID_ARGUMENT -2

/**
 * A buffer length does not match the expected size.
 */
#define CATCMA_ERR_DIMENSION -3

/**
 * An objective value passed to tell is NaN or infinite.
 */
#define CATCMA_ERR_NON_FINITE -4

/**
 * The covariance matrix lost positive-definiteness; the optimizer cannot continue.
 */
#define CATCMA_ERR_NUMERICAL -5

/**
 * Call order violated, e.g. tell without a preceding ask.
 */
#define CATCMA_ERR_STATE -6

/**
 * No solution has been evaluated yet.
 */
#define CATCMA_ERR_NO_SOLUTION -7

/**
 * A Rust panic was caught at the boundary.
 */
#define CATCMA_ERR_PANIC -99

/**
 * Problem kinds accepted by [`catcma_problem_new`].
 */
#define CATCMA_PROBLEM_F1 0

#define CATCMA_PROBLEM_F2 1

#define CATCMA_PROBLEM_F2_TANH 2

#define CATCMA_PROBLEM_F3 3

/**
 * Freeze policies accepted by [`catcma_optimizer_new`].
 */
#define CATCMA_FREEZE_ADAPTIVE 0

#define CATCMA_FREEZE_FIXED 1

/**
 * Opaque optimizer with its own random stream.
 */
typedef struct CatcmaOptimizer CatcmaOptimizer;

/**
 * Opaque benchmark problem instance.
 */
typedef struct CatcmaProblem CatcmaProblem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failed call on this thread. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *catcma_last_error(void);

/**
 * Static description of a status code.
 */
const char *catcma_status_string(int32_t code);

/**
 * Generates a seeded problem instance. `kind` is one of `CATCMA_PROBLEM_*`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one pointer.
 */
int32_t catcma_problem_new(int32_t kind, uintptr_t n, uintptr_t m, double alpha, uint64_t seed, struct CatcmaProblem **out);

/**
 * Evaluates `f(c, x)`; `c` holds `m` bytes (zero means 0, anything else 1).
 *
 * # Safety
 * `problem` must come from [`catcma_problem_new`]; `c`, `x` and `out` must
 * point to at least `m`, `n` and one elements.
 */
int32_t catcma_problem_evaluate(const struct CatcmaProblem *problem, const uint8_t *c, uintptr_t m, const double *x, uintptr_t n, double *out);

/**
 * # Safety
 * `problem` must be null or come from [`catcma_problem_new`] and not be used afterwards.
 */
void catcma_problem_free(struct CatcmaProblem *problem);

/**
 * Creates an optimizer for `n` continuous and `m` binary variables.
 *
 * `freeze_mode` is `CATCMA_FREEZE_ADAPTIVE` (then `freeze_value` is the
 * factor `A`) or `CATCMA_FREEZE_FIXED` (then it is the iteration count). It
 * only matters when `use_ws` is set.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one pointer.
 */
int32_t catcma_optimizer_new(uintptr_t n, uintptr_t m, bool use_ws, bool use_hr, int32_t freeze_mode, double freeze_value, uint64_t seed, struct CatcmaOptimizer **out);

/**
 * # Safety
 * `opt` must be null or come from [`catcma_optimizer_new`] and not be used afterwards.
 */
void catcma_optimizer_free(struct CatcmaOptimizer *opt);

/**
 * Number of candidates per ask; 0 for a null handle.
 *
 * # Safety
 * `opt` must be null or a live optimizer handle.
 */
uintptr_t catcma_optimizer_population_size(const struct CatcmaOptimizer *opt);

/**
 * Iterations the Bernoulli model stays frozen; 0 without warm-starting.
 *
 * # Safety
 * `opt` must be null or a live optimizer handle.
 */
uint64_t catcma_optimizer_t_freeze(const struct CatcmaOptimizer *opt);

/**
 * Objective evaluations consumed by completed tells.
 *
 * # Safety
 * `opt` must be null or a live optimizer handle.
 */
uint64_t catcma_optimizer_evals_used(const struct CatcmaOptimizer *opt);

/**
 * Best value told so far; +infinity before the first tell or for a null handle.
 *
 * # Safety
 * `opt` must be null or a live optimizer handle.
 */
double catcma_optimizer_best_value(const struct CatcmaOptimizer *opt);

/**
 * Samples a population. Writes `lambda * m` bytes of binary vectors to `c`
 * and `lambda * n` decoded continuous vectors to `x`, candidate by
 * candidate. A new ask discards an untold population.
 *
 * # Safety
 * `opt` must be a live handle; `c` and `x` must hold `c_len` and `x_len` elements.
 */
int32_t catcma_optimizer_ask(struct CatcmaOptimizer *opt, uint8_t *c, uintptr_t c_len, double *x, uintptr_t x_len);

/**
 * Reports the objective values of the last asked population, in the same
 * order, and updates the distribution.
 *
 * After `CATCMA_ERR_NUMERICAL` the optimizer must not be stepped again.
 *
 * # Safety
 * `opt` must be a live handle; `values` must hold `len` elements.
 */
int32_t catcma_optimizer_tell(struct CatcmaOptimizer *opt, const double *values, uintptr_t len);

/**
 * Copies the best `(c, x)` evaluated so far.
 *
 * # Safety
 * `opt` must be a live handle; `c` and `x` must hold `m` and `n` elements.
 */
int32_t catcma_optimizer_best_solution(const struct CatcmaOptimizer *opt, uint8_t *c, uintptr_t m, double *x, uintptr_t n);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CATCMA_H */
