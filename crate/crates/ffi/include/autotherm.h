#ifndef AUTOTHERM_H
#define AUTOTHERM_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Result of every call.
typedef enum AtStatus {
  AT_OK = 0,
  // A numerical contract or a quadrature failed.
  AT_NUMERICAL = 1,
  // Malformed scenario, bad parameter, unknown label.
  AT_INVALID_INPUT = 2,
  AT_NULL_POINTER = 3,
  // The caller's buffer is too small; the required size was still written.
  AT_BUFFER_TOO_SMALL = 4,
  AT_IO = 5,
  // A panic was caught at the boundary.
  AT_INTERNAL = 6,
} AtStatus;

// Built-in example families.
typedef enum AtFamily {
  // One angle.
  AT_CMAYBE = 0,
  // Mixing weight and angle.
  AT_WERNER_ZX = 1,
  AT_WERNER_XX = 2,
} AtFamily;

// Opaque scenario handle.
typedef struct AtScenario AtScenario;

// One catalysis check.
typedef struct AtCheck {
  // NUL-terminated, truncated to fit.
  char name[32];
  double residual;
  double threshold;
  bool pass;
} AtCheck;

// Heat, work and entropy balance at one time. Undefined entries are NaN.
typedef struct AtLedger {
  double tau;
  double heat;
  double work;
  double energy_change;
  double entropy_change_system;
  double entropy_change_memory;
  double entropy_change_work;
  double delta_rel;
  double effective_heat;
  double landauer_gap;
  double landauer_margin;
  double mutual_information;
  double first_law_residual;
  double second_law_residual;
  double memory_energy_residual;
  double energy_conservation_residual;
} AtLedger;

// Speed-limit quantities and bound margins at one time. Undefined times are NaN.
typedef struct AtQtsl {
  double p;
  double tau;
  double dist_s;
  double dist_m;
  double lambda_s;
  double lambda_m;
  double t_s;
  double t_m;
  double lambda_star;
  double t_star;
  double b_star;
  double quadrature_error_estimate;
  double fannes_margin;
  double dynamical_landauer_margin;
  double stein_exponent;
  double hypothesis_bound;
  double hypothesis_margin;
} AtQtsl;

// Closed-form values for a built-in family; `qtsl` is NaN when undefined.
typedef struct AtClosedForms {
  double dist_s;
  double dist_m;
  double lambda_s;
  double lambda_m;
  double scaled_distance;
  double scaled_norm;
  double qtsl;
} AtClosedForms;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` (NUL-terminated,
// truncated to `len`). Returns the full length including the NUL, so a call
// with `len = 0` sizes the buffer.
//
// # Safety
// `buf` must be null or valid for `len` bytes.
size_t at_last_error(char *buf, size_t len);

// Library version as a static NUL-terminated string.
const char *at_version(void);

// Loads a scenario TOML file.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum AtStatus at_scenario_from_file(const char *path, struct AtScenario **out);

// Parses a scenario from TOML text.
//
// # Safety
// `text` must be a NUL-terminated string; `out` must be writable.
enum AtStatus at_scenario_from_toml(const char *text, struct AtScenario **out);

// Builds a built-in family member. `first` is the angle for the C-maybe
// family and the mixing weight otherwise; `second` is the Werner angle and
// ignored for C-maybe.
//
// # Safety
// `out` must be writable.
enum AtStatus at_scenario_builtin(enum AtFamily family,
                                  double first,
                                  double second,
                                  bool bath_coupling,
                                  struct AtScenario **out);

// Releases a handle; null is ignored.
//
// # Safety
// `sc` must come from one of the constructors and not be used afterwards.
void at_scenario_free(struct AtScenario *sc);

// Dimension of the subsystem `label` (`bath`, `system`, `memory`, `work`).
//
// # Safety
// Pointers must be valid; `label` NUL-terminated.
enum AtStatus at_scenario_dim(const struct AtScenario *sc, const char *label, size_t *out);

// Runs every catalysis check at `tau`. Records go to `records` (up to
// `capacity`); `count` receives the number of checks and `all_pass` whether
// all of them passed. Returns `AT_BUFFER_TOO_SMALL` when `capacity < count`.
//
// # Safety
// `records` must be valid for `capacity` entries (or null with capacity 0);
// `count` and `all_pass` must be writable.
enum AtStatus at_verify(const struct AtScenario *sc,
                        double tau,
                        size_t n_max,
                        struct AtCheck *records,
                        size_t capacity,
                        size_t *count,
                        bool *all_pass);

// Thermodynamic ledger at `tau`.
//
// # Safety
// `sc` must be a live handle; `out` writable.
enum AtStatus at_ledger(const struct AtScenario *sc, double tau, struct AtLedger *out);

// Speed limit of Schatten order `p` (use `INFINITY` for the operator norm)
// at `tau`, with the Fannes, Landauer and hypothesis-testing margins.
// `quad_tol <= 0` keeps the default quadrature tolerance.
//
// # Safety
// `sc` must be a live handle; `out` writable.
enum AtStatus at_qtsl(const struct AtScenario *sc,
                      double p,
                      double tau,
                      double quad_tol,
                      struct AtQtsl *out);

// Reduced state of subsystem `label` at time `t`, written row-major as
// interleaved (re, im) pairs. `capacity` counts doubles and must be at least
// 2·d²; `dim` receives d either way.
//
// # Safety
// `data` must be valid for `capacity` doubles; `dim` writable.
enum AtStatus at_reduced_state(const struct AtScenario *sc,
                               double t,
                               const char *label,
                               double *data,
                               size_t capacity,
                               size_t *dim);

// Incomplete elliptic integral of the second kind, ∫₀^φ √(1 − m sin²x) dx.
//
// # Safety
// `out` must be writable.
enum AtStatus at_ellipe(double phi, double m, double *out);

// ∫₀^τ |cos 2t| dt.
double at_abs_cos_integral(double tau);

// ∫₀^τ |sin 2t| dt.
double at_abs_sin_integral(double tau);

// Closed-form distances, time-averaged trace norms and speed-limit ratio
// of a built-in family at `tau > 0` (parameters as in [`at_scenario_builtin`]).
//
// # Safety
// `out` must be writable.
enum AtStatus at_closed_forms(enum AtFamily family,
                              double first,
                              double second,
                              double tau,
                              struct AtClosedForms *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AUTOTHERM_H */
