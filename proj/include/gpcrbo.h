/*
 * C API for the gpcrbo library: Gaussian-process classified regression with
 * learned failure thresholds, plus constrained min-value entropy-search
 * Bayesian optimization.
 *
 * All objects are opaque handles created and destroyed through this API.
 * Functions returning gpcrbo_status report GPCRBO_OK on success; on failure
 * gpcrbo_last_error() describes the problem (thread-local). Constructors
 * return NULL on failure with the error available the same way.
 *
 * Strings returned through char** out-parameters are heap-allocated and must
 * be released with gpcrbo_string_free().
 */

#ifndef GPCRBO_H
#define GPCRBO_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gpcrbo_status {
    GPCRBO_OK = 0,
    GPCRBO_ERROR_INVALID_ARGUMENT = 1,
    GPCRBO_ERROR_FACTORIZATION = 2,
    GPCRBO_ERROR_CONFIG = 3,
    GPCRBO_ERROR_RUNTIME = 4,
} gpcrbo_status;

const char *gpcrbo_last_error(void);
void gpcrbo_string_free(char *s);

/* ---- hybrid datasets: stable (x, y) pairs plus unstable x-only labels --- */

typedef struct gpcrbo_dataset gpcrbo_dataset;

gpcrbo_dataset *gpcrbo_dataset_create(int dim);
gpcrbo_dataset *gpcrbo_dataset_from_json(const char *json);
gpcrbo_status gpcrbo_dataset_add_stable(gpcrbo_dataset *data, const double *x, double y);
gpcrbo_status gpcrbo_dataset_add_unstable(gpcrbo_dataset *data, const double *x);
gpcrbo_status gpcrbo_dataset_to_json(const gpcrbo_dataset *data, char **json_out);
int gpcrbo_dataset_dim(const gpcrbo_dataset *data);
int gpcrbo_dataset_n_stable(const gpcrbo_dataset *data);
int gpcrbo_dataset_n_unstable(const gpcrbo_dataset *data);
void gpcrbo_dataset_free(gpcrbo_dataset *data);

/* ---- GPCR models ------------------------------------------------------- */

typedef struct gpcrbo_model gpcrbo_model;

/* Isometric Matern 3/2 kernel. Pass threshold = INFINITY for an all-stable
 * dataset to get exact GP regression. */
gpcrbo_model *gpcrbo_model_fit(const gpcrbo_dataset *data, double kernel_variance,
                               double kernel_lengthscale, double noise_std, double threshold);
gpcrbo_status gpcrbo_model_predict(const gpcrbo_model *model, const double *x, int n_points,
                                   double *mean_out, double *variance_out);
gpcrbo_status gpcrbo_model_prob_stable(const gpcrbo_model *model, const double *x,
                                       double *prob_out);
double gpcrbo_model_threshold(const gpcrbo_model *model);
int gpcrbo_model_ep_converged(const gpcrbo_model *model);
void gpcrbo_model_free(gpcrbo_model *model);

/* Threshold line searches. ML scans [lo, hi]; MAP scans the prior's +-3
 * sigma range. Both return 0 by convention when no stable data exists. */
gpcrbo_status gpcrbo_threshold_ml(const gpcrbo_dataset *data, double kernel_variance,
                                  double kernel_lengthscale, double noise_std, double lo,
                                  double hi, double *c_out);
gpcrbo_status gpcrbo_threshold_map(const gpcrbo_dataset *data, double kernel_variance,
                                   double kernel_lengthscale, double noise_std,
                                   double prior_mean, double prior_std, double *c_out);

/* ---- built-in benchmark problems --------------------------------------- */

typedef struct gpcrbo_problem gpcrbo_problem;

/* Names: "gardner", "branin-circle", "branin-circle-mixed". */
gpcrbo_problem *gpcrbo_problem_create(const char *name);
int gpcrbo_problem_dim(const gpcrbo_problem *problem);
int gpcrbo_problem_n_constraints(const gpcrbo_problem *problem);
/* Noiseless objective value. */
gpcrbo_status gpcrbo_problem_objective(const gpcrbo_problem *problem, const double *x,
                                       double *value_out);
/* Brute-force feasible minimum (dense grid plus refinement). */
gpcrbo_status gpcrbo_problem_true_min(const gpcrbo_problem *problem, double *value_out);
void gpcrbo_problem_free(gpcrbo_problem *problem);

/* ---- ask-tell optimization sessions ------------------------------------ */

typedef struct gpcrbo_session gpcrbo_session;

/* config_text uses the flat "key = value" format documented in the README
 * (problem, case, seed, kernel/noise/prior settings, ...). */
gpcrbo_session *gpcrbo_session_create(const char *config_text);
int gpcrbo_session_dim(const gpcrbo_session *session);
int gpcrbo_session_n_level_set(const gpcrbo_session *session);
int gpcrbo_session_n_binary(const gpcrbo_session *session);
int gpcrbo_session_iteration(const gpcrbo_session *session);

/* Next point to evaluate; x_out must hold dim doubles. Idempotent until the
 * matching observe call. */
gpcrbo_status gpcrbo_session_suggest(gpcrbo_session *session, double *x_out);

/* Report the coupled observation for the outstanding suggestion.
 * objective_stable = 0 marks an unstable objective (objective_value is then
 * ignored). constraint_ok / constraint_values hold one entry per constraint,
 * level-set constraints first, then binary ones (values of binary entries
 * are ignored). n_constraints must match the session. On validation errors
 * the session state is unchanged. */
gpcrbo_status gpcrbo_session_observe(gpcrbo_session *session, int objective_stable,
                                     double objective_value, const int *constraint_ok,
                                     const double *constraint_values, int n_constraints);

gpcrbo_status gpcrbo_session_best_guess(gpcrbo_session *session, double *x_out);

/* Current thresholds: c_out[0] = objective (NaN when plain-GP modeled),
 * then one entry per level-set constraint. */
gpcrbo_status gpcrbo_session_thresholds(const gpcrbo_session *session, double *c_out);

/* index 0 = objective dataset, 1..M = level-set constraint datasets. */
gpcrbo_status gpcrbo_session_dataset_json(const gpcrbo_session *session, int index,
                                          char **json_out);
void gpcrbo_session_free(gpcrbo_session *session);

/* ---- whole benchmark runs ----------------------------------------------- */

/* One seeded run on a built-in problem; returns the per-iteration CSV and a
 * JSON summary. */
gpcrbo_status gpcrbo_run_bench(const char *config_text, char **run_csv_out,
                               char **summary_json_out);

/* Repeated seeded runs with aggregate regret and threshold traces. */
gpcrbo_status gpcrbo_run_stats(const char *config_text, char **regret_mean_csv_out,
                               char **regret_median_csv_out, char **thresholds_csv_out,
                               char **summary_json_out);

#ifdef __cplusplus
}
#endif

#endif /* GPCRBO_H */
