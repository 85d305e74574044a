#ifndef LEVYBRIDGE_LEVYBRIDGE_H
#define LEVYBRIDGE_LEVYBRIDGE_H

/* C interface to the levybridge library.
 *
 * Every function returns an lb_status. On failure the message is available
 * from lb_last_error() on the same thread until the next call. Strings
 * returned through char** are owned by the caller and released with
 * lb_string_free(). Handles are released with their *_free function, which
 * accepts NULL. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define LB_API __declspec(dllexport)
#else
#define LB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lb_status {
  LB_OK = 0,
  LB_ERR_INVALID_ARGUMENT = 1,
  /* An argument lies outside the region where the quantity is defined. */
  LB_ERR_DOMAIN = 2,
  /* Quadrature or root finding missed its tolerance. */
  LB_ERR_NUMERIC = 3,
  LB_ERR_INTERNAL = 4,
  LB_ERR_NULL = 5
} lb_status;

typedef struct lb_config lb_config;
typedef struct lb_solver lb_solver;
typedef struct lb_convolution lb_convolution;
typedef struct lb_marginal lb_marginal;
typedef struct lb_bridge lb_bridge;

LB_API const char* lb_version(void);
LB_API const char* lb_status_name(lb_status status);
LB_API const char* lb_last_error(void);
LB_API void lb_string_free(char* s);

/* Run configuration, in the JSON layout
 *   {"model": {alpha, scale, beta, domain_floor}, "dim": n,
 *    "bridge": {epsilon, rho, r_eps, horizon, endpoint},
 *    "numerics": {spacing, m_cap, workers, truncation_tolerance},
 *    "sampling": {samples, seed}, "output": {format, path}}.
 * Missing keys keep their defaults and unknown keys are rejected. */
LB_API lb_status lb_config_new(lb_config** out);
LB_API lb_status lb_config_from_json(const char* json, lb_config** out);
/* Overlays the keys present in `json` onto `config` and revalidates. */
LB_API lb_status lb_config_merge_json(lb_config* config, const char* json);
LB_API lb_status lb_config_to_json(const lb_config* config, char** out);
LB_API void lb_config_free(lb_config* config);

/* Solver for g(Lambda). `variant` is one of simplified, general, g-zero, custom-k;
 * `custom_k` holds the four coefficients (log_y, log_fpp, curvature, constant)
 * and is read only for the custom variant. */
LB_API lb_status lb_solver_new(const lb_config* config, const char* variant, const double* custom_k,
                               lb_solver** out);
LB_API lb_status lb_solver_floor(const lb_solver* solver, double* log_lambda_floor);
LB_API lb_status lb_solver_solve(const lb_solver* solver, double log_lambda, double* g);
/* {"g", "residual", "diagnostics": {...}} */
LB_API lb_status lb_solver_report_json(const lb_solver* solver, double log_lambda, char** out);
LB_API void lb_solver_free(lb_solver* solver);

LB_API lb_status lb_convolution_new(const lb_config* config, int max_order, double r_max, lb_convolution** out);
LB_API lb_status lb_convolution_log_density(const lb_convolution* table, int order, double r, double* out);
/* CSV with columns r, log_density, lower_bound, upper_bound over the grid nodes
 * of one order; the bounds are NaN where they are undefined. */
LB_API lb_status lb_convolution_csv(const lb_convolution* table, int order, double delta, char** out);
LB_API void lb_convolution_free(lb_convolution* table);

LB_API lb_status lb_marginal_new(const lb_config* config, double time, double r_max, lb_marginal** out);
LB_API lb_status lb_marginal_log_density(const lb_marginal* marginal, double r, double* log_density,
                                         int* dominant_m);
LB_API lb_status lb_marginal_log_tail(const lb_marginal* marginal, double lambda, double* out);
/* CSV with columns r, log_mu, lower, upper, dominant_m. */
LB_API lb_status lb_marginal_csv(const lb_marginal* marginal, double delta, double step, char** out);
/* CSV with columns lambda, log_tail, lower, upper, lower_plus_sign, upper_plus_sign. */
LB_API lb_status lb_marginal_tail_csv(const lb_marginal* marginal, double delta, double step, char** out);
LB_API void lb_marginal_free(lb_marginal* marginal);

LB_API lb_status lb_bridge_new(const lb_config* config, lb_bridge** out);
LB_API lb_status lb_bridge_count_log_pmf(const lb_bridge* bridge, int m, double* out);
/* Samples first .. first + count - 1 as JSON lines
 * {"sample", "jump_times", "jumps", "count", "method_flag"}. The text depends
 * only on the configuration and the indices, never on `workers`. */
LB_API lb_status lb_bridge_sample_jsonl(const lb_bridge* bridge, uint64_t first, uint64_t count, int workers,
                                        char** out);
LB_API void lb_bridge_free(lb_bridge* bridge);

/* S(eps) = eps g(1 / (eps r_eps)). */
LB_API lb_status lb_speed(const lb_config* config, double* out);
/* Finite-dimensional rate at `count` intermediate (time, point) pairs; `points`
 * holds count * dim coordinates. With count = 0 this is the rate of the linear
 * path, which is 0. `value` is +inf when the data leave the segment [0, x]. */
LB_API lb_status lb_rate(const lb_config* config, const double* times, const double* points, size_t count,
                         double* value, int* admissible, char** violations_json);

LB_API size_t lb_check_count(void);
LB_API const char* lb_check_name(size_t index);
/* Runs one validation check. `report_json` receives {check, pass, metrics,
 * sweep}; `sweep_csv` (may be NULL) the sweep as CSV. */
LB_API lb_status lb_validate(const lb_config* config, const char* check, int* pass, char** report_json,
                             char** sweep_csv);
/* Runs every check and renders a Markdown summary table. */
LB_API lb_status lb_report(const lb_config* config, int* all_pass, char** markdown);

#ifdef __cplusplus
}
#endif

#endif
