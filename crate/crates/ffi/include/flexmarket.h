/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef FLEXMARKET_H
#define FLEXMARKET_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum {
  FM_STATUS_OK = 0,
  FM_STATUS_NULL_POINTER = 1,
  FM_STATUS_INVALID_UTF8 = 2,
  FM_STATUS_PARSE = 3,
  FM_STATUS_VALIDATION = 4,
  /**
   * The market could not be cleared or balanced, or a ledger failed.
   */
  FM_STATUS_SIMULATION = 5,
  FM_STATUS_IO = 6,
  FM_STATUS_OUT_OF_RANGE = 7,
  FM_STATUS_PANIC = 8,
} FmStatus;

typedef enum {
  FM_REGIME_RTP = 0,
  FM_REGIME_INTEGRATED = 1,
} FmRegime;

/**
 * Opaque handle to a finished run.
 */
typedef struct FmReport FmReport;

/**
 * Opaque scenario handle.
 */
typedef struct FmScenario FmScenario;

/**
 * Cost metrics over the measured days of a run.
 */
typedef struct {
  size_t measured_days;
  /**
   * EUR/MWh.
   */
  double combined;
  double usage;
  double balancing;
  double energy_mwh;
  double balancing_energy_mwh;
  double balancing_cost_eur;
  double mean_spot;
  /**
   * Only meaningful when `has_group_advantage` is true.
   */
  double group_advantage;
  bool has_group_advantage;
} FmMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, a static NUL-terminated string.
 */
const char *fm_version(void);

/**
 * Message of the last failure on this thread, or NULL. Valid until the
 * next failing call on the same thread.
 */
const char *fm_last_error_message(void);

/**
 * The built-in desk-scale scenario.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for a handle.
 */
FmStatus fm_scenario_desk(FmScenario **out);

/**
 * The desk system with the appliance fleet.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for a handle.
 */
FmStatus fm_scenario_desk_appliances(FmScenario **out);

/**
 * Loads and validates a TOML scenario file.
 *
 * # Safety
 * `path` must be NUL-terminated; `out` must be writable.
 */
FmStatus fm_scenario_load(const char *path, FmScenario **out);

/**
 * Parses and validates a scenario from TOML text.
 *
 * # Safety
 * `text` must be NUL-terminated; `out` must be writable.
 */
FmStatus fm_scenario_from_toml(const char *text, FmScenario **out);

/**
 * # Safety
 * `scenario` must be a live handle or NULL.
 */
FmStatus fm_scenario_set_regime(FmScenario *scenario, FmRegime regime);

/**
 * # Safety
 * `scenario` must be a live handle or NULL.
 */
FmStatus fm_scenario_set_flexible_ratio(FmScenario *scenario, double ratio);

/**
 * Simulated days, warm-up included.
 *
 * # Safety
 * `scenario` must be a live handle or NULL.
 */
FmStatus fm_scenario_set_days(FmScenario *scenario, size_t n_days);

/**
 * # Safety
 * `scenario` must be a live handle or NULL.
 */
FmStatus fm_scenario_set_seed(FmScenario *scenario, uint64_t seed);

/**
 * Adds the default renewable producer, or removes any.
 *
 * # Safety
 * `scenario` must be a live handle or NULL.
 */
FmStatus fm_scenario_set_renewable(FmScenario *scenario, bool enabled);

/**
 * Releases a scenario. NULL is ignored.
 *
 * # Safety
 * `scenario` must come from this library and not be used afterwards.
 */
void fm_scenario_free(FmScenario *scenario);

/**
 * Runs the scenario with the scenario's own seed.
 *
 * # Safety
 * `scenario` must be a live handle; `out` must be writable.
 */
FmStatus fm_simulate(const FmScenario *scenario, FmReport **out);

/**
 * Releases a report. NULL is ignored.
 *
 * # Safety
 * `report` must come from this library and not be used afterwards.
 */
void fm_report_free(FmReport *report);

/**
 * Simulated days in the report; 0 for NULL.
 *
 * # Safety
 * `report` must be a live handle or NULL.
 */
size_t fm_report_day_count(const FmReport *report);

/**
 * SHA-256 of the scenario as lowercase hex, owned by the report.
 *
 * # Safety
 * `report` must be a live handle or NULL.
 */
const char *fm_report_scenario_hash(const FmReport *report);

/**
 * Copies the 24 day-ahead prices (EUR/MWh) of `day` into `out`.
 *
 * # Safety
 * `out` must have room for 24 doubles.
 */
FmStatus fm_report_spot_prices(const FmReport *report, size_t day, double *out);

/**
 * Copies the 24 imbalance prices (EUR/MWh) of `day` into `out`.
 *
 * # Safety
 * `out` must have room for 24 doubles.
 */
FmStatus fm_report_imbalance_prices(const FmReport *report, size_t day, double *out);

/**
 * # Safety
 * `report` must be a live handle; `out` must be writable.
 */
FmStatus fm_report_metrics(const FmReport *report, FmMetrics *out);

/**
 * Writes the CSV and summary files of the run into `dir`, creating it.
 *
 * # Safety
 * `report` must be a live handle; `dir` must be NUL-terminated.
 */
FmStatus fm_report_write_outputs(const FmReport *report, const char *dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FLEXMARKET_H */
