#ifndef PILOT_FFI_H
#define PILOT_FFI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PilotStatus {
  PILOT_STATUS_OK = 0,
  PILOT_STATUS_NULL_POINTER = 1,
  PILOT_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Exhaustive search space above its limit.
   */
  PILOT_STATUS_INFEASIBLE = 3,
  PILOT_STATUS_BUFFER_TOO_SMALL = 4,
  PILOT_STATUS_INTERNAL = 5,
  PILOT_STATUS_PANIC = 6,
} PilotStatus;

typedef enum PilotFitness {
  PILOT_FITNESS_SUM_SE = 0,
  PILOT_FITNESS_INTERFERENCE = 1,
} PilotFitness;

typedef enum PilotSolver {
  PILOT_SOLVER_RPA = 0,
  PILOT_SOLVER_EXPA = 1,
  PILOT_SOLVER_GA = 2,
  PILOT_SOLVER_SK_GA = 3,
  PILOT_SOLVER_PK_GA = 4,
} PilotSolver;

/**
 * Opaque solve result handle.
 */
typedef struct PilotResult PilotResult;

/**
 * Opaque scenario handle: a large-scale fading tensor.
 */
typedef struct PilotScenario PilotScenario;

typedef struct PilotGaConfig {
  size_t population_size;
  size_t generations;
  double crossover_prob;
  double mutation_prob;
  size_t elite_count;
  size_t cluster_count;
  size_t recluster_period;
  enum PilotFitness fitness;
  /**
   * Exhaustive-search limit on the number of assignments.
   */
  uint64_t expa_limit;
} PilotGaConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next call into this library on the same thread.
 */
const char *pilot_last_error(void);

/**
 * Generates a scenario (hexagonal cells, uniform user drop, path loss and
 * shadowing) with the library's default physical parameters.
 *
 * # Safety
 * `out` must be valid for writing one pointer.
 */
enum PilotStatus pilot_scenario_generate(size_t cells,
                                         size_t users,
                                         size_t antennas,
                                         uint64_t seed,
                                         struct PilotScenario **out);

/**
 * Wraps a caller-supplied tensor laid out `[bs][cell][user]`, `L * L * K`
 * finite positive values.
 *
 * # Safety
 * `data` must point to `len` readable doubles; `out` must be writable.
 */
enum PilotStatus pilot_scenario_from_beta(size_t cells,
                                          size_t users,
                                          const double *data,
                                          size_t len,
                                          struct PilotScenario **out);

/**
 * # Safety
 * `scenario` must be null or a handle from this library, freed at most once.
 */
void pilot_scenario_free(struct PilotScenario *scenario);

/**
 * # Safety
 * `scenario` must be a live handle; `cells` and `users` must be writable.
 */
enum PilotStatus pilot_scenario_dims(const struct PilotScenario *scenario,
                                     size_t *cells,
                                     size_t *users);

/**
 * Copies the `L * L * K` tensor into `out`.
 *
 * # Safety
 * `scenario` must be a live handle; `out` must hold `len` doubles.
 */
enum PilotStatus pilot_scenario_beta(const struct PilotScenario *scenario, double *out, size_t len);

/**
 * Sum spectral efficiency of an assignment.
 *
 * # Safety
 * `scenario` must be a live handle; `pilots` must hold `len` values; `out`
 * must be writable.
 */
enum PilotStatus pilot_objective(const struct PilotScenario *scenario,
                                 const size_t *pilots,
                                 size_t len,
                                 double *out);

/**
 * Library defaults for the genetic solvers.
 */
struct PilotGaConfig pilot_ga_config_default(void);

/**
 * Runs one solver. `config` may be null for defaults; `parallelism` only
 * matters for `PILOT_SOLVER_PK_GA`.
 *
 * # Safety
 * `scenario` must be a live handle, `config` null or readable, `out`
 * writable.
 */
enum PilotStatus pilot_solve(const struct PilotScenario *scenario,
                             enum PilotSolver solver,
                             const struct PilotGaConfig *config,
                             size_t parallelism,
                             uint64_t seed,
                             struct PilotResult **out);

/**
 * # Safety
 * `result` must be null or a handle from this library, freed at most once.
 */
void pilot_result_free(struct PilotResult *result);

/**
 * Best fitness found (sum SE, or negated interference in interference mode).
 *
 * # Safety
 * `result` must be a live handle; `out` writable.
 */
enum PilotStatus pilot_result_objective(const struct PilotResult *result, double *out);

/**
 * # Safety
 * `result` must be a live handle; `out` writable.
 */
enum PilotStatus pilot_result_evaluations(const struct PilotResult *result, uint64_t *out);

/**
 * # Safety
 * `result` must be a live handle; `out` writable.
 */
enum PilotStatus pilot_result_wall_time(const struct PilotResult *result, double *out);

/**
 * Copies the best assignment, `L * K` entries.
 *
 * # Safety
 * `result` must be a live handle; `out` must hold `len` values.
 */
enum PilotStatus pilot_result_assignment(const struct PilotResult *result, size_t *out, size_t len);

/**
 * Number of history entries (`T + 1` for the genetic solvers).
 *
 * # Safety
 * `result` must be a live handle; `out` writable.
 */
enum PilotStatus pilot_result_history_len(const struct PilotResult *result, size_t *out);

/**
 * Copies the per-generation best fitness.
 *
 * # Safety
 * `result` must be a live handle; `out` must hold `len` doubles.
 */
enum PilotStatus pilot_result_history(const struct PilotResult *result, double *out, size_t len);

/**
 * `(K!)^(L-1)` as a decimal string. Release with [`pilot_string_free`].
 *
 * # Safety
 * `out` must be writable.
 */
enum PilotStatus pilot_search_space(size_t cells, size_t users, char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library, freed at most once.
 */
void pilot_string_free(char *s);

/**
 * Library version, static storage.
 */
const char *pilot_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PILOT_FFI_H */
