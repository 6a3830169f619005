/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef DFL_ARRAY_H
#define DFL_ARRAY_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DflStatus {
  DFL_STATUS_OK = 0,
  DFL_STATUS_NULL_POINTER = 1,
  // Invalid input: bad JSON, failed validation, bad UTF-8, bad enum value.
  DFL_STATUS_VALIDATION = 2,
  // The model cannot be evaluated, e.g. a target too close to an antenna.
  DFL_STATUS_NUMERICAL = 3,
  DFL_STATUS_IO = 4,
  DFL_STATUS_BUFFER_TOO_SMALL = 5,
  DFL_STATUS_PANIC = 6,
} DflStatus;

// Wavefront model for array factors.
typedef enum DflHypothesis {
  DFL_HYPOTHESIS_PLANAR = 0,
  DFL_HYPOTHESIS_NON_PLANAR = 1,
} DflHypothesis;

// Opaque estimation result.
typedef struct DflEstimate DflEstimate;

// Opaque scenario handle.
typedef struct DflScenario DflScenario;

typedef struct DflEstimateSummary {
  double gamma_hat_rad;
  double gamma_hat_deg;
  double attenuation_db;
  double p0;
  double py;
} DflEstimateSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failing call on this thread; empty after a success.
// The pointer stays valid until the next call into this library on the same
// thread.
const char *dfl_last_error(void);

// Parses and validates a scenario from a JSON string.
enum DflStatus dfl_scenario_from_json(const char *json, struct DflScenario **out);

// Loads a scenario file.
enum DflStatus dfl_scenario_load(const char *path, struct DflScenario **out);

// Releases a scenario. Null is ignored.
void dfl_scenario_free(struct DflScenario *scenario);

enum DflStatus dfl_scenario_num_antennas(const struct DflScenario *scenario, size_t *out);

enum DflStatus dfl_scenario_wavelength(const struct DflScenario *scenario, double *out);

// Places (or replaces) the target sheet. On failure the scenario is unchanged.
enum DflStatus dfl_scenario_set_target(struct DflScenario *scenario,
                                       double half_width_m,
                                       double half_height_m,
                                       double theta_rad,
                                       double x_m,
                                       double y_m);

// Removes the target, making the scene empty.
enum DflStatus dfl_scenario_clear_target(struct DflScenario *scenario);

// Noiseless signal vector, `m = -M..=M`, as separate real and imaginary
// parts. Both buffers must hold `len` values.
enum DflStatus dfl_signal_vector(const struct DflScenario *scenario,
                                 double *re,
                                 double *im,
                                 size_t len,
                                 size_t *needed);

// Runs the estimator on the scenario's scene.
enum DflStatus dfl_doa_run(const struct DflScenario *scenario, struct DflEstimate **out);

// Releases an estimate. Null is ignored.
void dfl_estimate_free(struct DflEstimate *estimate);

enum DflStatus dfl_estimate_summary(const struct DflEstimate *estimate,
                                    struct DflEstimateSummary *out);

// Power-ratio curve: grid angles (rad) and `P_y / P_0`.
enum DflStatus dfl_estimate_curve(const struct DflEstimate *estimate,
                                  double *gammas_rad,
                                  double *ratios,
                                  size_t len,
                                  size_t *needed);

// Per-antenna attenuation in dB, `m = -M..=M`.
enum DflStatus dfl_estimate_antenna_attenuation(const struct DflEstimate *estimate,
                                                double *out,
                                                size_t len,
                                                size_t *needed);

// `|F_a(gamma)|` with uniform weights over the scenario's array.
// `hypothesis` is a `DflHypothesis` value.
enum DflStatus dfl_array_factor(const struct DflScenario *scenario,
                                double gamma_rad,
                                uint32_t hypothesis,
                                double *out);

// First Fresnel zone radius at the middle of a link.
enum DflStatus dfl_fresnel_radius(double frequency_hz, double link_length_m, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DFL_ARRAY_H */
