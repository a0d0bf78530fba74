#ifndef EXTRUDER_H
#define EXTRUDER_H

/* C interface to the extruder library. Every call that can fail returns an
 * ext_status; the message of the most recent failure on the calling thread
 * is available from ext_last_error(). Handles are opaque and owned by the
 * caller, who releases them with the matching *_free function. */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define EXT_API __declspec(dllexport)
#else
#define EXT_API __attribute__((visibility("default")))
#endif

typedef enum ext_status {
  EXT_OK = 0,
  EXT_ERR_CONFIG = 2,
  EXT_ERR_SOLVER = 3,     /* step-size collapse or degenerate phase domain */
  EXT_ERR_INVARIANT = 4,  /* reserved for callers that treat failed checks as errors */
  EXT_ERR_DOMAIN = 5,
  EXT_ERR_GAIN = 6,
  EXT_ERR_IO = 7,
  EXT_ERR_ANALYSIS = 8,
  EXT_ERR_ARGUMENT = 9,   /* null handle, unknown column, short buffer */
  EXT_ERR_INTERNAL = 10
} ext_status;

typedef struct ext_config ext_config;
typedef struct ext_run ext_run;
typedef struct ext_sweep ext_sweep;
typedef struct ext_analysis ext_analysis;

EXT_API const char* ext_version(void);
EXT_API const char* ext_last_error(void);
EXT_API const char* ext_status_name(ext_status s);

/* ---- configuration ---------------------------------------------------- */

EXT_API ext_status ext_config_default(ext_config** out);
EXT_API ext_status ext_config_load(const char* path, ext_config** out);
EXT_API ext_status ext_config_parse(const char* text, ext_config** out);
EXT_API ext_status ext_config_set(ext_config* cfg, const char* key, const char* value);
/* Copies the value of `key` into buf (NUL-terminated). *needed receives the
 * required size including the terminator; pass buf = NULL to query it. */
EXT_API ext_status ext_config_get(const ext_config* cfg, const char* key, char* buf, size_t len,
                                  size_t* needed);
EXT_API ext_status ext_config_validate(const ext_config* cfg);
EXT_API void ext_config_free(ext_config* cfg);

/* ---- steady state and gains ------------------------------------------- */

typedef struct ext_steady_info {
  double q_f_star, K, s_r;
  double T_inlet, T_nozzle;
  double q1, q2, q3, q4;
  double bound_lower, bound_upper; /* admissible T_b - T_m */
  double solid_margin, liquid_margin;
  int valid;
} ext_steady_info;

/* out_dir may be NULL to skip file output. */
EXT_API ext_status ext_steady(const ext_config* cfg, const char* out_dir, ext_steady_info* info);

typedef struct ext_gains_info {
  double c, gamma, C, A, E, D, d1, d2;
  double f_at_s_r;
  double max_residual;
  double setpoint_bound;
  int setpoint_ok;
} ext_gains_info;

EXT_API ext_status ext_gains(const ext_config* cfg, const char* out_dir, ext_gains_info* info);

/* ---- single runs ------------------------------------------------------ */

typedef struct ext_run_summary {
  double settling_time;
  double peak_abs_qf;
  double min_inlet_T, max_inlet_T;
  double final_s;
  double final_rel_error;
  double first_violation_t; /* -1 when validity held throughout */
  int validity_ok;
  int invariants_ok;
  int terminated_early;
  long steps_accepted, steps_rejected, rhs_evals;
} ext_run_summary;

/* Integrates the closed loop. With a non-NULL out_dir the run directory is
 * written as well. */
EXT_API ext_status ext_run_create(const ext_config* cfg, const char* out_dir, ext_run** out);
EXT_API size_t ext_run_length(const ext_run* run);
/* Copies up to n values of a series column (t, s, q_f, Ts_inlet, sdot,
 * solid_margin, liquid_margin, That_inlet, under_margin, err_L2, err_H1,
 * dev_H1, Phi_hat, Z, V_tilde, V_hat). */
EXT_API ext_status ext_run_series(const ext_run* run, const char* column, double* out, size_t n);
EXT_API ext_status ext_run_summary_get(const ext_run* run, ext_run_summary* out);
/* Invariant report as JSON; the string lives as long as the handle. */
EXT_API const char* ext_run_report(const ext_run* run);
EXT_API size_t ext_run_warning_count(const ext_run* run);
EXT_API const char* ext_run_warning(const ext_run* run, size_t i);
EXT_API const char* ext_run_termination(const ext_run* run); /* "" unless terminated early */
EXT_API ext_status ext_run_write(const ext_run* run, const char* dir);
EXT_API void ext_run_free(ext_run* run);

/* ---- sweeps and comparisons ------------------------------------------- */

typedef struct ext_sweep_item {
  double b, c;
  int ok;
  ext_run_summary summary; /* zeroed when !ok */
} ext_sweep_item;

/* Runs the (sweep_b, sweep_c) grid from the configuration. Per-run failures
 * are stored in the items, not returned. */
EXT_API ext_status ext_sweep_run(const ext_config* cfg, const char* out_dir, ext_sweep** out);
EXT_API size_t ext_sweep_count(const ext_sweep* sw);
EXT_API ext_status ext_sweep_item_get(const ext_sweep* sw, size_t i, ext_sweep_item* out);
EXT_API const char* ext_sweep_item_error(const ext_sweep* sw, size_t i);
EXT_API void ext_sweep_free(ext_sweep* sw);

typedef struct ext_comparison {
  ext_run_summary backstepping;
  ext_run_summary pi;
  int contrast; /* PI violates validity while backstepping keeps it */
} ext_comparison;

EXT_API ext_status ext_compare_pi(const ext_config* cfg, const char* out_dir,
                                  ext_comparison* out);

/* ---- analysis of a stored run ------------------------------------------ */

typedef struct ext_analysis_info {
  int has_inline_report;
  int matches_inline;
  int invariants_ok;
  long V_tilde_increases;
  size_t fit_count;
  size_t trace_length;
  size_t warning_count;
} ext_analysis_info;

typedef struct ext_fit {
  char quantity[32];
  double t0, t1, rate, theoretical, ratio, r2;
  size_t points;
  int conclusive;
  int pass;
} ext_fit;

EXT_API ext_status ext_analyze(const char* run_dir, const char* out_dir, ext_analysis** out);
EXT_API ext_status ext_analysis_info_get(const ext_analysis* a, ext_analysis_info* out);
EXT_API ext_status ext_analysis_fit(const ext_analysis* a, size_t i, ext_fit* out);
EXT_API const char* ext_analysis_report(const ext_analysis* a);
EXT_API const char* ext_analysis_warning(const ext_analysis* a, size_t i);
EXT_API void ext_analysis_free(ext_analysis* a);

#ifdef __cplusplus
}
#endif

#endif /* EXTRUDER_H */
