#ifndef QUANTA_ABM_H
#define QUANTA_ABM_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QabmStatus {
  QABM_STATUS_OK = 0,
  QABM_STATUS_NULL_POINTER = 1,
  QABM_STATUS_INVALID_UTF8 = 2,
  QABM_STATUS_INVALID_CONFIG = 3,
  QABM_STATUS_INVALID_ARGUMENT = 4,
  QABM_STATUS_SIMULATION_FINISHED = 5,
  QABM_STATUS_INDEX_OUT_OF_RANGE = 6,
  QABM_STATUS_PANIC = 7,
} QabmStatus;

/**
 * Opaque scenario configuration.
 */
typedef struct QabmConfig QabmConfig;

/**
 * Opaque simulation run.
 */
typedef struct QabmSimulation QabmSimulation;

typedef struct QabmAgentRecord {
  uint32_t agent_id;
  /**
   * 1 for the infector, 0 otherwise.
   */
  uint8_t is_infector;
  /**
   * 1 if the agent breathes from the cough zone.
   */
  uint8_t in_cough_zone;
  uint8_t weight_class;
  uint32_t seat_row;
  uint32_t seat_col;
  double weight_fraction;
  double breath_rate_m3ph;
  double dose_mq;
} QabmAgentRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or null if none.
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *qabm_last_error(void);

/**
 * Static, nul-terminated crate version.
 */
const char *qabm_version(void);

/**
 * Writes a new handle holding the default scenario into `*out`.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum QabmStatus qabm_config_default(struct QabmConfig **out);

/**
 * Parses `key = value` config text into a new handle. `*out` is untouched
 * on failure.
 *
 * # Safety
 * `text` must be null or a nul-terminated string; `out` null or writable.
 */
enum QabmStatus qabm_config_parse(const char *text, struct QabmConfig **out);

/**
 * # Safety
 * `config` must be null or a handle from this library not yet freed.
 */
void qabm_config_free(struct QabmConfig *config);

/**
 * Room volume in m³.
 *
 * # Safety
 * `config` must be null or live; `out` null or writable.
 */
enum QabmStatus qabm_config_room_volume(const struct QabmConfig *config, double *out);

/**
 * Builds a simulation from `config` and `seed`. The config handle may be
 * freed afterwards.
 *
 * # Safety
 * `config` must be null or live; `out` null or writable.
 */
enum QabmStatus qabm_simulation_new(const struct QabmConfig *config,
                                    uint32_t seed,
                                    struct QabmSimulation **out);

/**
 * # Safety
 * `sim` must be null or a handle from this library not yet freed.
 */
void qabm_simulation_free(struct QabmSimulation *sim);

/**
 * Advances one second.
 *
 * # Safety
 * `sim` must be null or live.
 */
enum QabmStatus qabm_simulation_step(struct QabmSimulation *sim);

/**
 * Runs all remaining steps.
 *
 * # Safety
 * `sim` must be null or live.
 */
enum QabmStatus qabm_simulation_run(struct QabmSimulation *sim);

/**
 * Number of completed steps.
 *
 * # Safety
 * `sim` must be null or live; `out` null or writable.
 */
enum QabmStatus qabm_simulation_step_index(const struct QabmSimulation *sim, uint64_t *out);

/**
 * Airborne quanta in the room, mq: total, cough zone and bulk. Any output
 * pointer may be null to skip it.
 *
 * # Safety
 * `sim` must be null or live; each output null or writable.
 */
enum QabmStatus qabm_simulation_quanta(const struct QabmSimulation *sim,
                                       double *total_mq,
                                       double *cough_zone_mq,
                                       double *bulk_mq);

/**
 * Agent count, infector included.
 *
 * # Safety
 * `sim` must be null or live; `out` null or writable.
 */
enum QabmStatus qabm_simulation_agent_count(const struct QabmSimulation *sim, size_t *out);

/**
 * Snapshot of agent `index` (0 is the infector).
 *
 * # Safety
 * `sim` must be null or live; `out` null or writable.
 */
enum QabmStatus qabm_simulation_agent(const struct QabmSimulation *sim,
                                      size_t index,
                                      struct QabmAgentRecord *out);

/**
 * Closed-form single-zone airborne quanta at `t_s`, in quanta.
 *
 * # Safety
 * `config` must be null or live; `out` null or writable.
 */
enum QabmStatus qabm_oracle_quanta_at(const struct QabmConfig *config, double t_s, double *out);

/**
 * Closed-form dose in mq for a breathing rate in m³/h up to `t_s`.
 *
 * # Safety
 * `config` must be null or live; `out` null or writable.
 */
enum QabmStatus qabm_oracle_expected_dose(const struct QabmConfig *config,
                                          double breath_rate_m3ph,
                                          double t_s,
                                          double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QUANTA_ABM_H */
