/* C interface to the refugia simulation library.
 *
 * Every call returns an rf_status. On failure the message for the calling
 * thread is available from rf_last_error() until the next failing call.
 * Handles are opaque and owned by the caller; free them with the matching
 * rf_*_free function (passing NULL is allowed). */
#ifndef REFUGIA_H
#define REFUGIA_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define RF_API __declspec(dllexport)
#else
#define RF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rf_status {
  RF_OK = 0,
  RF_ERR_CONFIG = 1,
  RF_ERR_SOLVER = 2,
  RF_ERR_MONITOR = 3,
  RF_ERR_ARGUMENT = 4,
  RF_ERR_IO = 5,
  RF_ERR_INTERNAL = 6
} rf_status;

typedef enum rf_regime {
  RF_REGIME_EXTINCTION = 0,
  RF_REGIME_PERSISTENCE = 1,
  RF_REGIME_MARGINAL = 2
} rf_regime;

typedef enum rf_field_kind {
  RF_FIELD_MASK = 0,
  RF_FIELD_RV = 1,
  RF_FIELD_RP = 2,
  RF_FIELD_HOST = 3,
  RF_FIELD_BV = 4,
  RF_FIELD_DV = 5,
  RF_FIELD_INFECTED = 10,
  RF_FIELD_VI = 11,
  RF_FIELD_VS = 12,
  RF_FIELD_PRED = 13,
  RF_FIELD_CUM_VI = 14
} rf_field_kind;

typedef enum rf_scheme { RF_SCHEME_SEMI = 0, RF_SCHEME_EXPLICIT = 1 } rf_scheme;
typedef enum rf_face_average { RF_FACE_ARITHMETIC = 0, RF_FACE_HARMONIC = 1 } rf_face_average;
typedef enum rf_monitor_mode { RF_MONITOR_WARN = 0, RF_MONITOR_ABORT = 1 } rf_monitor_mode;

typedef enum rf_ic_kind {
  RF_IC_NONE = 0,
  RF_IC_PATCHES = 1,
  RF_IC_CENTERED = 2,
  RF_IC_UNIFORM = 3,
  RF_IC_CONSTANT = 4
} rf_ic_kind;

typedef enum rf_axis { RF_AXIS_FREQUENCY = 0, RF_AXIS_QUANTITY = 1 } rf_axis;

typedef struct rf_params rf_params;
typedef struct rf_mask rf_mask;
typedef struct rf_layout rf_layout;
typedef struct rf_fields rf_fields;
typedef struct rf_run rf_run;

typedef struct rf_grid {
  int nx, ny;
  double lx, ly; /* meters */
} rf_grid;

RF_API const char* rf_last_error(void);
RF_API const char* rf_version(void);

/* Parameters */
RF_API rf_status rf_params_preset(const char* name, rf_params** out);
RF_API rf_status rf_params_load(const char* path, rf_params** out);
RF_API rf_status rf_params_parse(const char* text, rf_params** out);
RF_API rf_status rf_params_clone(const rf_params* p, rf_params** out);
RF_API void rf_params_free(rf_params* p);
RF_API rf_status rf_params_set(rf_params* p, const char* key, double value);
RF_API rf_status rf_params_get(const rf_params* p, const char* key, double* value);
RF_API rf_status rf_params_validate(const rf_params* p);
RF_API rf_status rf_params_hash(const rf_params* p, uint64_t* hash);
/* Writes the `name = value` form into buf (NUL terminated). *needed receives
 * the full length including the terminator, so a NULL buf queries the size. */
RF_API rf_status rf_params_dump(const rf_params* p, char* buf, size_t cap, size_t* needed);
RF_API size_t rf_param_count(void);
RF_API const char* rf_param_key(size_t index);
RF_API size_t rf_preset_count(void);
RF_API const char* rf_preset_name(size_t index);

/* Grids, masks and layouts */
RF_API rf_status rf_grid_check(rf_grid grid);
RF_API rf_status rf_mask_frequency(rf_grid grid, int n, double area, rf_mask** out);
RF_API rf_status rf_mask_uniform(rf_grid grid, double r, rf_mask** out);
RF_API rf_status rf_mask_from_values(rf_grid grid, const double* values, size_t len,
                                     rf_mask** out);
RF_API void rf_mask_free(rf_mask* m);
RF_API rf_status rf_mask_area(const rf_mask* m, double* area);
RF_API rf_status rf_mask_values(const rf_mask* m, double* buf, size_t len);

RF_API rf_status rf_layout_load(const char* path, rf_layout** out);
RF_API rf_status rf_layout_parse(const char* text, rf_layout** out);
RF_API void rf_layout_free(rf_layout* l);
RF_API size_t rf_layout_count(const rf_layout* l);
RF_API rf_status rf_layout_validate(const rf_layout* l, rf_grid grid);
RF_API rf_status rf_layout_field(const rf_layout* l, rf_grid grid, double* buf, size_t len);

/* Coefficient fields */
RF_API rf_status rf_fields_assemble(const rf_params* p, const rf_mask* m, rf_fields** out);
RF_API void rf_fields_free(rf_fields* f);
RF_API rf_status rf_fields_grid(const rf_fields* f, rf_grid* grid);
RF_API rf_status rf_fields_get(const rf_fields* f, rf_field_kind kind, double* buf, size_t len);
RF_API rf_status rf_fields_total_hosts(const rf_fields* f, double* total);

/* Spectral quantities */
typedef struct rf_eigen_summary {
  double lambda_vs, lambda_vi, lambda_p;
  double residual_vs, residual_vi, residual_p;
  double max_phi_s; /* eigenfunction of L_Vs scaled to min 1 */
  double min_phi_i; /* eigenfunction of L_Vi scaled to max 1 */
  rf_regime regime;
} rf_eigen_summary;

RF_API rf_status rf_eigen(const rf_fields* f, const rf_params* p, rf_face_average avg,
                          rf_eigen_summary* out);
/* Dense-matrix comparison values for L_Vs and L_Vi (small grids only). */
RF_API rf_status rf_eigen_dense(const rf_fields* f, const rf_params* p, double* lambda_vs,
                                double* lambda_vi);
RF_API rf_status rf_eigenfunction(const rf_fields* f, const rf_params* p, int which_vi,
                                  double* buf, size_t len);
RF_API rf_status rf_frequency_curve(const rf_params* p, rf_grid grid, double area,
                                    const int* n, size_t count, double* lambda);
RF_API rf_status rf_homogenized_limit(const rf_params* p, double area_fraction,
                                      double* limit);
RF_API const char* rf_regime_name(rf_regime r);

/* Simulation */
typedef struct rf_initial {
  rf_ic_kind kind;
  const rf_layout* layout; /* RF_IC_PATCHES */
  double refuge_area;      /* RF_IC_CENTERED */
  double vi_scale, vs_scale, p0_scale;
} rf_initial;

typedef struct rf_sim_options {
  double horizon; /* days */
  int steps;
  int snapshot_stride; /* 0: initial and final only */
  rf_scheme scheme;
  rf_face_average face_average;
  rf_monitor_mode monitor_mode;
  double clamp_tol;
  double bound_tol;
} rf_sim_options;

RF_API void rf_initial_defaults(rf_initial* ic);
RF_API void rf_sim_options_defaults(rf_sim_options* opts);
RF_API rf_status rf_explicit_stable_dt(const rf_fields* f, const rf_params* p,
                                       rf_face_average avg, double* dt);

/* On RF_ERR_MONITOR with abort mode *out is still NULL. */
RF_API rf_status rf_simulate(const rf_fields* f, const rf_params* p, const rf_initial* ic,
                             const rf_sim_options* opts, rf_run** out);
RF_API void rf_run_free(rf_run* r);

typedef struct rf_series_row {
  double t, sup_i, sup_vi, sup_vs, sup_p, int_i, int_v, int_p;
  double sup_v, inf_vi, min_i_over_h, max_i_over_h;
} rf_series_row;

RF_API size_t rf_run_series_count(const rf_run* r);
RF_API rf_status rf_run_series(const rf_run* r, rf_series_row* rows, size_t cap);
RF_API size_t rf_run_snapshot_count(const rf_run* r);
/* Snapshot 0 is the initial state, the last one the final state. */
RF_API rf_status rf_run_snapshot(const rf_run* r, size_t index, rf_field_kind kind,
                                 double* buf, size_t len, double* t);
RF_API rf_status rf_run_closed_form_gap(const rf_run* r, double* gap);

typedef struct rf_monitor_report {
  double clamp_mass, clamp_fraction;
  long clamp_events;
  double worst_vector_ratio, worst_predator_ratio;
  long infection_violations;
  size_t breach_count;
} rf_monitor_report;

RF_API rf_status rf_run_monitors(const rf_run* r, rf_monitor_report* out);
RF_API const char* rf_run_breach(const rf_run* r, size_t index);

typedef struct rf_harvest {
  double harvest, total_hosts, ratio;
  double decay_rate;
  double tail_bound; /* infinite when the decay rate is not positive */
} rf_harvest;

RF_API rf_status rf_run_harvest(const rf_run* r, rf_harvest* out);

typedef struct rf_envelope {
  int applicable, holds;
  double eps, decay_s, decay_i, max_phi_s, min_phi_i;
  double v_bound_at_zero, i_upper, i_lower_limit;
  double worst_v, worst_i_upper, worst_i_lower, slack;
  char message[160];
} rf_envelope;

/* eps <= 0 selects the default half budget. */
RF_API rf_status rf_run_envelope(const rf_run* r, double eps, double slack, rf_envelope* out);

typedef struct rf_persistence {
  int applicable, passed, vectors_persist, hosts_saturated;
  double min_inf_vi, infection_gap;
  char message[160];
} rf_persistence;

RF_API rf_status rf_run_persistence(const rf_run* r, double tol, double burn_in,
                                    double gap_threshold, rf_persistence* out);

typedef struct rf_bounds {
  double lower, upper, lambda_vs, lambda_vi, max_phi_s, min_phi_i, eps;
} rf_bounds;

/* eps <= 0 selects the default half budget. */
RF_API rf_status rf_harvest_sandwich(const rf_fields* f, const rf_params* p, double v0_sup,
                                     double vi0_inf, double eps, double p0_deviation,
                                     rf_bounds* out);

/* Sweeps */
typedef struct rf_sweep_spec {
  const rf_params* params;
  rf_grid grid;
  double refuge_area; /* frequency axis and centered initial patch */
  rf_initial initial;
  rf_sim_options options;
  rf_axis axis;
  const double* values;
  size_t count;
  int threads; /* 0: hardware concurrency */
} rf_sweep_spec;

typedef struct rf_sweep_row {
  double axis_value, lambda1, harvest, healthy_fraction;
  int ok;
  char message[160];
} rf_sweep_row;

/* rows must hold spec->count entries, filled in axis order. Failed cases are
 * reported per row; the call itself fails only on an invalid spec. */
RF_API rf_status rf_sweep(const rf_sweep_spec* spec, rf_sweep_row* rows);

#ifdef __cplusplus
}
#endif

#endif
