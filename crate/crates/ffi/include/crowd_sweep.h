#ifndef CROWD_SWEEP_H
#define CROWD_SWEEP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define CS_OK 0

#define CS_ERR_NULL_POINTER 1

#define CS_ERR_INVALID_ARGUMENT 2

#define CS_ERR_PARSE 3

#define CS_ERR_VALIDATION 4

#define CS_ERR_NUMERIC 5

#define CS_ERR_BUFFER_TOO_SMALL 6

#define CS_ERR_PANIC 7

#define CS_SCHEME_VELOCITY 0

#define CS_SCHEME_POSITION 1

#define CS_SIDE_LEFT 0

#define CS_SIDE_RIGHT 1

#define CS_MODE_PAPER 0

#define CS_MODE_GEOMETRIC 1

// Validated scenario.
typedef struct CsScenario CsScenario;

// Simulated trajectory.
typedef struct CsTrajectory CsTrajectory;

// Optimal constant control around one obstacle.
typedef struct CsObstacleRun {
  double a_bar;
  double t1;
  double theta1;
  double theta_deg;
  double arc_len;
  double release_x;
  double release_y;
  double terminal_dist;
  double cost;
} CsObstacleRun;

typedef struct CsSweepRow {
  double tau;
  double a_bar;
  double t1;
  double theta1;
  double cost;
} CsSweepRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` (NUL-terminated,
// truncated to fit) and returns the full message length without the NUL.
//
// # Safety
// `buf` must be null or valid for `len` bytes.
size_t cs_last_error_message(char *buf, size_t len);

// Parses and validates a scenario from a NUL-terminated JSON document.
//
// # Safety
// `json` must be a valid C string and `out` valid for writes.
int32_t cs_scenario_from_json(const char *json, struct CsScenario **out);

// # Safety
// `sc` must be null or a handle from [`cs_scenario_from_json`] not yet freed.
void cs_scenario_free(struct CsScenario *sc);

// # Safety
// `sc` must be a live scenario handle.
size_t cs_scenario_agent_count(const struct CsScenario *sc);

// # Safety
// `sc` must be a live scenario handle.
size_t cs_scenario_obstacle_count(const struct CsScenario *sc);

// Integrates the scenario under the constant control `control` with step `h`.
//
// # Safety
// `sc` must be a live scenario handle and `out` valid for writes.
int32_t cs_simulate(const struct CsScenario *sc,
                    double h,
                    double control,
                    int32_t scheme_id,
                    int32_t side_id,
                    struct CsTrajectory **out);

// # Safety
// `traj` must be null or a handle from [`cs_simulate`] not yet freed.
void cs_trajectory_free(struct CsTrajectory *traj);

// Number of time nodes (steps + 1).
//
// # Safety
// `traj` must be a live trajectory handle.
size_t cs_trajectory_node_count(const struct CsTrajectory *traj);

// Length of one state vector (twice the agent count).
//
// # Safety
// `traj` must be a live trajectory handle.
size_t cs_trajectory_dimension(const struct CsTrajectory *traj);

// Number of constraint pairs, the length of one multiplier row.
//
// # Safety
// `traj` must be a live trajectory handle.
size_t cs_trajectory_pair_count(const struct CsTrajectory *traj);

// Copies node `k`'s time and state (`x1, y1, x2, y2, ...`).
//
// # Safety
// `traj` must be a live handle, `t` valid for writes, `buf` valid for `len`
// writes.
int32_t cs_trajectory_state(const struct CsTrajectory *traj,
                            size_t k,
                            double *t,
                            double *buf,
                            size_t len);

// Copies the contact multipliers of step `k` (one per pair, canonical
// pair order).
//
// # Safety
// `traj` must be a live handle and `buf` valid for `len` writes.
int32_t cs_trajectory_multipliers(const struct CsTrajectory *traj,
                                  size_t k,
                                  double *buf,
                                  size_t len);

// Optimal constant control for a one-agent, one-obstacle scenario.
//
// # Safety
// `sc` must be a live scenario handle and `out` valid for writes.
int32_t cs_analytic_optimize(const struct CsScenario *sc,
                             double tau,
                             int32_t mode_id,
                             int32_t side_id,
                             struct CsObstacleRun *out);

// Optimal constant control for each of `n` weights, written to `rows` in
// input order.
//
// # Safety
// `sc` must be a live handle; `taus` valid for `n` reads and `rows` for `n`
// writes.
int32_t cs_sweep(const struct CsScenario *sc,
                 const double *taus,
                 size_t n,
                 int32_t mode_id,
                 int32_t side_id,
                 struct CsSweepRow *rows);

// Euclidean projection of `u` onto `{v : <g_k, v> + b_k >= 0}`.
//
// `gradients` holds `m` rows of length `dim`; `offsets` may be null (all
// zero). `v_out` receives `dim` values; `eta_out`, if not null, receives the
// `m` multipliers.
//
// # Safety
// All non-null pointers must be valid for the stated lengths.
int32_t cs_project_velocity(const double *u,
                            size_t dim,
                            const double *gradients,
                            const double *offsets,
                            size_t m,
                            double *v_out,
                            double *eta_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CROWD_SWEEP_H */
