/* C interface to the pafit library: preferential attachment simulation,
 * likelihood fitting, limit quantities, experiments and ingestion.
 *
 * Every function returns a pafit_status. On failure, pafit_last_error()
 * describes the problem for the calling thread. Strings returned through
 * char** outputs are owned by the caller and released with pafit_string_free;
 * histories are released with pafit_history_free. */
#ifndef PAFIT_H
#define PAFIT_H

#include <stddef.h>
#include <stdint.h>

#if defined(PAFIT_BUILDING_LIBRARY)
#define PAFIT_API __attribute__((visibility("default")))
#else
#define PAFIT_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pafit_status {
  PAFIT_OK = 0,
  PAFIT_ERR_INVALID_ARGUMENT = 1,
  PAFIT_ERR_STRUCTURE = 2,
  PAFIT_ERR_LABELING = 3,
  PAFIT_ERR_DIMENSION = 4,
  PAFIT_ERR_PARSE = 5,
  PAFIT_ERR_IO = 6,
  PAFIT_ERR_CONFIG = 7,
  PAFIT_ERR_DEGENERATE_DATA = 8,
  PAFIT_ERR_EMPTY_DATA = 9,
  PAFIT_ERR_NONCONVERGENCE = 10,
  PAFIT_ERR_SIZE_GUARD = 11,
  PAFIT_ERR_INTERNAL = 12
} pafit_status;

typedef struct pafit_history pafit_history;

typedef struct pafit_history_info {
  uint64_t n;          /* nodes = edges */
  uint32_t K;          /* communities (1 when unlabeled) */
  int labeled;
  uint64_t max_degree;
  uint64_t self_loops;
} pafit_history_info;

typedef struct pafit_bo_fit {
  double a_hat;
  double loglik;    /* scaled log-likelihood at a_hat */
  double std_error; /* plug-in sqrt(avar(a_hat) / n) */
  uint64_t iterations;
  int converged;
  int at_boundary;
} pafit_bo_fit;

PAFIT_API const char* pafit_version(void);
PAFIT_API const char* pafit_status_name(pafit_status status);
/* Message of the last failed call on this thread ("" if none). */
PAFIT_API const char* pafit_last_error(void);
PAFIT_API void pafit_string_free(char* s);

/* Histories. config_json: {"model", "n", "seed", "bo_a", "delta", "hpam": {"pi", "gamma"}}. */
PAFIT_API pafit_status pafit_simulate(const char* config_json, pafit_history** out);
/* Canonical JSON form of a simulation config after validation. */
PAFIT_API pafit_status pafit_sim_config_resolve(const char* config_json, char** out_json);
PAFIT_API pafit_status pafit_history_read_csv(const char* path, pafit_history** out);
PAFIT_API pafit_status pafit_history_write_csv(const pafit_history* history, const char* path);
PAFIT_API pafit_status pafit_history_to_csv(const pafit_history* history, char** out_csv);
PAFIT_API pafit_status pafit_history_info_get(const pafit_history* history, pafit_history_info* out);
PAFIT_API void pafit_history_free(pafit_history* history);

/* Buckley-Osthus inference. */
PAFIT_API pafit_status pafit_bo_loglik(const pafit_history* history, double a, double* out);
PAFIT_API pafit_status pafit_bo_score(const pafit_history* history, double a, double* out);
PAFIT_API pafit_status pafit_fit_bo(const pafit_history* history, double eps, double max, pafit_bo_fit* out);
PAFIT_API pafit_status pafit_fit_bo_json(const pafit_history* history, double eps, double max, char** out_json);

/* HPAM inference on a labeled history. denominator: "exact" (default when NULL) or "scaled".
 * *converged is set when non-NULL. */
PAFIT_API pafit_status pafit_fit_hpam_json(const pafit_history* history, const char* denominator, char** out_json,
                                           int* converged);

/* Limit quantities. */
PAFIT_API pafit_status pafit_limits_bo_json(double a0, double tail_tol, size_t k_max, char** out_json);
PAFIT_API pafit_status pafit_sigma2_beta(double a0, double* sigma2, double* beta, double* avar);
/* pi: K entries; gamma: K*K row-major. p0_out: K entries, theta0_out: K*K (either may be NULL). */
PAFIT_API pafit_status pafit_limits_hpam(size_t K, const double* pi, const double* gamma, double* p0_out,
                                         double* theta0_out, double* residual_out);
PAFIT_API pafit_status pafit_limits_hpam_json(size_t K, const double* pi, const double* gamma, char** out_json);

/* Experiments. Runs the config, writes raw_estimates.csv and summary.csv
 * under its output_path when write_outputs is nonzero, and returns the CSV
 * texts and a JSON array of warnings (any output pointer may be NULL). */
PAFIT_API pafit_status pafit_experiment_config_resolve(const char* config_json, char** out_json);
PAFIT_API pafit_status pafit_run_experiment(const char* config_json, int write_outputs, char** raw_csv,
                                            char** summary_csv, char** warnings_json);
/* Normality diagnostic of BO estimates; JSON {count, mean, std, ks_distance, degenerate, qq}. */
PAFIT_API pafit_status pafit_normality_json(const double* estimates, size_t count, uint64_t n, double a0,
                                            char** out_json);

/* Ingestion. request_json: {"input": path, "n_limit": N, "top_fraction": q,
 * "blocklist": [prefix...], "labels": path|null}. Returns the history and
 * the drop report JSON. */
PAFIT_API pafit_status pafit_ingest(const char* request_json, pafit_history** out, char** report_json);
/* Transaction CSV (and id,community labels when labeled) for a history. */
PAFIT_API pafit_status pafit_export_transactions(const pafit_history* history, char** transactions_csv,
                                                 char** labels_csv);

#ifdef __cplusplus
}
#endif

#endif /* PAFIT_H */
