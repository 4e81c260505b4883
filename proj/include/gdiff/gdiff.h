/* Public C API for the gdiff library.
 *
 * Every function returns a gdiff_status; out-parameters are written only on
 * GDIFF_OK. On failure, gdiff_last_error() returns a thread-local message
 * describing what went wrong (valid until the next failing call on the same
 * thread).
 *
 * Command functions take a JSON configuration object (as text) plus an
 * output directory; they write their artifacts (manifest.json and friends)
 * under that directory. The schemas are documented in the repository README.
 */
#ifndef GDIFF_GDIFF_H
#define GDIFF_GDIFF_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gdiff_status {
  GDIFF_OK = 0,
  GDIFF_ERR_INVALID_ARGUMENT = 1, /* bad config value or precondition */
  GDIFF_ERR_IO = 2,               /* file missing, unreadable, or malformed */
  GDIFF_ERR_NUMERIC = 3,          /* non-finite values in a computation */
  GDIFF_ERR_CHECK_FAILED = 4,     /* a verification check failed */
  GDIFF_ERR_INTERNAL = 5
} gdiff_status;

/* Library semantic version, e.g. "0.1.0". */
const char* gdiff_version(void);

/* Message from the most recent failing call on this thread ("" if none). */
const char* gdiff_last_error(void);

/* ----- Noise schedules ----- */

typedef struct gdiff_schedule gdiff_schedule;

/* Evenly spaced betas from beta_start (t = 1) to beta_end (t = T). */
gdiff_status gdiff_schedule_create_linear(int T, double beta_start, double beta_end,
                                          gdiff_schedule** out);

/* beta_t = beta_{t-1} + beta_{t-2} from two 1e-6 seeds; fails if any beta
 * reaches 1. */
gdiff_status gdiff_schedule_create_fibonacci(int n, gdiff_schedule** out);

gdiff_status gdiff_schedule_steps(const gdiff_schedule* s, int* out);

/* Timesteps are 1-based; alpha_bar accepts t = 0 (returns 1). */
gdiff_status gdiff_schedule_beta(const gdiff_schedule* s, int t, double* out);
gdiff_status gdiff_schedule_alpha_bar(const gdiff_schedule* s, int t, double* out);

/* Per-step Gamma noise parameters at the given theta0: theta_t, k_t and the
 * cumulative shape k_bar_t. Any out-pointer may be NULL. */
gdiff_status gdiff_schedule_gamma_params(const gdiff_schedule* s, double theta0, int t,
                                         double* theta, double* k, double* k_bar);

void gdiff_schedule_free(gdiff_schedule* s);

/* ----- Trained models (checkpoints) ----- */

typedef struct gdiff_model gdiff_model;

gdiff_status gdiff_model_load(const char* checkpoint_path, gdiff_model** out);
gdiff_status gdiff_model_data_dim(const gdiff_model* m, int* out);
gdiff_status gdiff_model_steps(const gdiff_model* m, int* out);
gdiff_status gdiff_model_param_count(const gdiff_model* m, int64_t* out);

/* "gaussian" or "gamma"; pointer is owned by the model handle. */
gdiff_status gdiff_model_noise_kind(const gdiff_model* m, const char** out);

/* Predict noise for a row-major batch x of shape [n, data_dim] at timestep
 * t (1-based); writes n*data_dim values to out. */
gdiff_status gdiff_model_predict(const gdiff_model* m, const double* x, int64_t n, int t,
                                 double* out);

void gdiff_model_free(gdiff_model* m);

/* ----- Commands -----
 *
 * config_json: a JSON object; unknown keys are ignored, missing keys take
 * documented defaults. out_dir is created if needed.
 */
gdiff_status gdiff_run_schedule(const char* config_json, const char* out_dir);
gdiff_status gdiff_run_train(const char* config_json, const char* out_dir);
gdiff_status gdiff_run_sample(const char* config_json, const char* out_dir);
gdiff_status gdiff_run_verify(const char* config_json, const char* out_dir);
gdiff_status gdiff_run_fit_noise(const char* config_json, const char* out_dir);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* GDIFF_GDIFF_H */
