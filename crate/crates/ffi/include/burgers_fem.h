#ifndef BURGERS_FEM_H
#define BURGERS_FEM_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BurgersStatus {
  BURGERS_STATUS_OK = 0,
  BURGERS_STATUS_NULL_POINTER = 1,
  BURGERS_STATUS_INVALID_ARGUMENT = 2,
  BURGERS_STATUS_INVALID_CONFIG = 3,
  BURGERS_STATUS_SOLVER_FAILURE = 4,
  // The simulation has not been run, or the last run failed.
  BURGERS_STATUS_NOT_RUN = 5,
  BURGERS_STATUS_OUT_OF_RANGE = 6,
  BURGERS_STATUS_BUFFER_TOO_SMALL = 7,
  BURGERS_STATUS_PANIC = 8,
} BurgersStatus;

// Opaque simulation handle.
typedef struct BurgersSimulation BurgersSimulation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the calling thread's last error message, NUL-terminated and
// truncated to `capacity` bytes, into `buffer`. Returns the full message
// length in bytes without the terminator. `buffer` may be null to query
// the length.
//
// # Safety
// `buffer` must be null or valid for `capacity` bytes.
size_t burgers_last_error_message(char *buffer, size_t capacity);

// Creates a simulation with the 1D example defaults.
//
// # Safety
// `out` must be valid for writing one pointer.
enum BurgersStatus burgers_simulation_new(struct BurgersSimulation **out);

// Releases a handle. Null is ignored.
//
// # Safety
// `sim` must be null or a handle from [`burgers_simulation_new`] that has
// not been freed.
void burgers_simulation_free(struct BurgersSimulation *sim);

// Sets one configuration key, using the same keys as the CLI config file.
// Discards any previous results.
//
// # Safety
// `sim` must be a live handle; `key` and `value` NUL-terminated strings.
enum BurgersStatus burgers_simulation_set(struct BurgersSimulation *sim,
                                          const char *key,
                                          const char *value);

// Validates the configuration and runs the simulation.
//
// # Safety
// `sim` must be a live handle.
enum BurgersStatus burgers_simulation_run(struct BurgersSimulation *sim);

// Number of mesh nodes, i.e. the length of one state vector.
//
// # Safety
// `sim` must be a live handle and `out` valid for one write.
enum BurgersStatus burgers_simulation_node_count(const struct BurgersSimulation *sim, size_t *out);

// Number of stored time levels, `M + 1`.
//
// # Safety
// `sim` must be a live handle and `out` valid for one write.
enum BurgersStatus burgers_simulation_level_count(const struct BurgersSimulation *sim, size_t *out);

// Copies the nodal values of time level `level` into `out`.
//
// # Safety
// `sim` must be a live handle and `out` valid for `capacity` doubles.
enum BurgersStatus burgers_simulation_state(const struct BurgersSimulation *sim,
                                            size_t level,
                                            double *out,
                                            size_t capacity);

// Copies the time levels `t_n` into `out`.
//
// # Safety
// `sim` must be a live handle and `out` valid for `capacity` doubles.
enum BurgersStatus burgers_simulation_times(const struct BurgersSimulation *sim,
                                            double *out,
                                            size_t capacity);

// Copies `‖W^n‖` for every level into `out`.
//
// # Safety
// `sim` must be a live handle and `out` valid for `capacity` doubles.
enum BurgersStatus burgers_simulation_l2_history(const struct BurgersSimulation *sim,
                                                 double *out,
                                                 size_t capacity);

// `log(e_coarse / e_fine) / log(ratio)`.
//
// # Safety
// `out` must be valid for one write.
enum BurgersStatus burgers_observed_order(double e_coarse,
                                          double e_fine,
                                          double ratio,
                                          double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BURGERS_FEM_H */
