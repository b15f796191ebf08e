//------------------------------------------------------------------------------
//
//   Copyright 2026 The corrbelief Authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------
#ifndef CORRBELIEF_H
#define CORRBELIEF_H

/*
 * C interface to the corrbelief library.
 *
 * Every function that can fail returns a cb_status. On failure the message is
 * available from cb_last_error() on the same thread until the next call.
 * Strings returned through `char **` out-parameters are owned by the caller
 * and released with cb_string_free(). Handles are released with their
 * matching *_free function; passing NULL to any *_free is a no-op.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CB_API __declspec(dllexport)
#else
#define CB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cb_status
{
  CB_OK = 0,
  CB_INVALID_ARGUMENT = 1,
  CB_STATE = 2,
  CB_NOT_FOUND = 3,
  CB_PARSE = 4,
  CB_SAMPLER = 5,
  CB_IO = 6,
  CB_INTERNAL = 99
} cb_status;

typedef enum cb_side
{
  CB_LEFT = 0,
  CB_RIGHT = 1
} cb_side;

typedef struct cb_belief cb_belief;
typedef struct cb_chain cb_chain;
typedef struct cb_service cb_service;

CB_API const char *cb_version(void);
CB_API const char *cb_last_error(void);
CB_API const char *cb_status_name(cb_status status);
CB_API void cb_string_free(char *text);

/* Beliefs: normal(mu, sigma) truncated to [-1, 1]. */

CB_API cb_status cb_belief_create(double mu, double sigma, cb_belief **out);
/* From a cone: most likely value and the 95% bounds. */
CB_API cb_status cb_belief_from_elicitation(double mu, double b_lower, double b_upper,
                                            cb_belief **out);
CB_API void cb_belief_free(cb_belief *belief);
CB_API cb_status cb_belief_params(const cb_belief *belief, double *mu, double *sigma);
CB_API cb_status cb_belief_pdf(const cb_belief *belief, double rho, double *out);
CB_API cb_status cb_belief_cdf(const cb_belief *belief, double rho, double *out);
CB_API cb_status cb_belief_quantile(const cb_belief *belief, double p, double *out);
/* Mean of the truncated distribution. */
CB_API cb_status cb_belief_mean(const cb_belief *belief, double *out);
/* Writes `count` draws to `out`. */
CB_API cb_status cb_belief_sample(const cb_belief *belief, uint64_t seed, size_t count,
                                  double *out);

/* MCMC-P chains. `config_json` may be NULL for defaults; otherwise an object
 * with any of trials, initial_width, target_acceptance, adapt_every, boundary. */

CB_API cb_status cb_chain_start(uint64_t seed, const char *config_json, cb_chain **out);
CB_API void cb_chain_free(cb_chain *chain);
/* `done` is set to 1 once the chain has run all its trials; the other outputs
 * are then left untouched. */
CB_API cb_status cb_chain_pending(const cb_chain *chain, size_t *trial_index, double *left_rho,
                                  double *right_rho, int *done);
/* A negative `duration_ms` records no response time. */
CB_API cb_status cb_chain_choose(cb_chain *chain, size_t trial_index, cb_side side,
                                 double duration_ms);
CB_API cb_status cb_chain_summarize(const cb_chain *chain, size_t burn_in, double *mean,
                                    double *ci_lower, double *ci_upper);
/* One JSON object per state, newline separated. */
CB_API cb_status cb_chain_export_jsonl(const cb_chain *chain, char **out);

/* Datasets. */

CB_API cb_status cb_dataset_generate_json(double rho_pop, size_t n, uint64_t seed, char **out);
CB_API cb_status cb_dataset_generate_csv(double rho_pop, size_t n, uint64_t seed, char **out);
/* `incongruent` selects the offset; `seed` breaks the tie at a zero prior. */
CB_API cb_status cb_congruence_resolve(double prior_mu, int incongruent, double clamp,
                                       uint64_t seed, double *out);

/* Posterior of one model.
 * Request: {"model": "PriorOnly" | "BayesianInformed" | "BayesianUniform",
 *           "dataset": {...}, "prior": {"mu", "b_lower", "b_upper"} | {"mu", "sigma"},
 *           "mcmc"?: {...}, "seed"?: integer}
 * `samples_jsonl` may be NULL. */
CB_API cb_status cb_posterior_json(const char *request_json, char **result_json,
                                   char **samples_jsonl);

/* Metrics. */

CB_API cb_status cb_mae(double predicted_mean, double elicited_mean, double *out);
/* KL(elicited || predicted) on an evenly spaced grid of `grid_points`
 * (0 selects the default). */
CB_API cb_status cb_kld_beliefs(const cb_belief *elicited, const cb_belief *predicted,
                                size_t grid_points, double *out);

/* Session service.
 * Options: {"data_dir"?: path, "trust_client_time"?: bool}; NULL for an
 * in-memory service. */

CB_API cb_status cb_service_create(const char *options_json, cb_service **out);
CB_API void cb_service_free(cb_service *service);
CB_API cb_status cb_service_add_study(cb_service *service, const char *study_json);
CB_API cb_status cb_service_recover(cb_service *service, size_t *restored);
/* Routes one HTTP request. Errors of the request itself are reported through
 * `http_status` and the JSON body, not through the return value. */
CB_API cb_status cb_service_handle(cb_service *service, const char *method, const char *path,
                                   const char *body, int *http_status, char **response);

/* Batch workflows. File sets are returned as {"files": {name: content}}. */

CB_API cb_status cb_validate_study(const char *study_json, char **normalized_json);
CB_API cb_status cb_validate_fleet(const char *fleet_json, char **normalized_json);
/* Result: {"summary": {sessions, trials, excluded_sessions, sealed_sessions},
 *          "files": {...}}. */
CB_API cb_status cb_simulate(const char *study_json, const char *fleet_json, uint64_t seed,
                             unsigned jobs, char **result_json);
CB_API cb_status cb_densities(const char *sessions_jsonl, size_t grid_points, char **files_json);
CB_API cb_status cb_scoring_input(const char *sessions_jsonl, const char *mcmc_json,
                                  char **input_json);
CB_API cb_status cb_score(const char *input_json, uint64_t seed, char **scores_csv);
CB_API cb_status cb_generate_batch(const char *config_json, uint64_t seed, char **files_json);

#ifdef __cplusplus
}
#endif

#endif
