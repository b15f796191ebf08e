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
#include "corrbelief/corrbelief.h"

#include "corrbelief/errors.hpp"
#include "corrbelief/metrics.hpp"
#include "corrbelief/pipeline.hpp"
#include "corrbelief/router.hpp"
#include "corrbelief/serialization.hpp"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

using namespace corrbelief;

struct cb_belief
{
  BoundedNormalBelief belief;
};

struct cb_chain
{
  McmcpChain chain;
};

struct cb_service
{
  std::unique_ptr<SessionService> service;
  std::unique_ptr<ApiRouter> router;
};

namespace {

thread_local std::string last_error;

cb_status status_for(std::exception const &error) noexcept
{
  if (dynamic_cast<InvalidArgument const *>(&error))
    return CB_INVALID_ARGUMENT;
  if (dynamic_cast<StateError const *>(&error))
    return CB_STATE;
  if (dynamic_cast<NotFound const *>(&error))
    return CB_NOT_FOUND;
  if (dynamic_cast<ParseError const *>(&error) || dynamic_cast<Json::exception const *>(&error))
    return CB_PARSE;
  if (dynamic_cast<SamplerFailure const *>(&error))
    return CB_SAMPLER;
  if (dynamic_cast<IoError const *>(&error))
    return CB_IO;
  return CB_INTERNAL;
}

template <typename F>
cb_status guarded(F &&body) noexcept
{
  try
  {
    last_error.clear();
    body();
    return CB_OK;
  }
  catch (std::exception const &error)
  {
    last_error = error.what();
    return status_for(error);
  }
  catch (...)
  {
    last_error = "unknown error";
    return CB_INTERNAL;
  }
}

template <typename T>
void require(T const *pointer, char const *name)
{
  if (!pointer)
    throw InvalidArgument(std::string(name) + " must not be NULL");
}

char *copy_out(std::string const &text)
{
  auto *out = static_cast<char *>(std::malloc(text.size() + 1));
  if (!out)
    throw std::bad_alloc();
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

Json parse_arg(char const *text, char const *name)
{
  require(text, name);
  return parse_json(text);
}

Json files_json(std::map<std::string, std::string> const &files)
{
  Json out = Json::object();
  for (auto const &[name, content] : files)
    out[name] = content;
  return out;
}

BoundedNormalBelief prior_belief(Json const &prior)
{
  if (prior.contains("sigma"))
    return BoundedNormalBelief(require_number(prior, "mu"), require_number(prior, "sigma"));
  return elicitation_from_json(prior).fitted;
}

}  // namespace

extern "C" {

const char *cb_version(void)
{
  return CORRBELIEF_VERSION;
}

const char *cb_last_error(void)
{
  return last_error.c_str();
}

const char *cb_status_name(cb_status status)
{
  switch (status)
  {
  case CB_OK:
    return "ok";
  case CB_INVALID_ARGUMENT:
    return "invalid_argument";
  case CB_STATE:
    return "state_error";
  case CB_NOT_FOUND:
    return "not_found";
  case CB_PARSE:
    return "parse_error";
  case CB_SAMPLER:
    return "sampler_failure";
  case CB_IO:
    return "io_error";
  case CB_INTERNAL:
    return "internal";
  }
  return "unknown";
}

void cb_string_free(char *text)
{
  std::free(text);
}

cb_status cb_belief_create(double mu, double sigma, cb_belief **out)
{
  return guarded([&] {
    require(out, "out");
    *out = new cb_belief{BoundedNormalBelief(mu, sigma)};
  });
}

cb_status cb_belief_from_elicitation(double mu, double b_lower, double b_upper, cb_belief **out)
{
  return guarded([&] {
    require(out, "out");
    *out = new cb_belief{fit_from_elicitation(mu, b_lower, b_upper).fitted};
  });
}

void cb_belief_free(cb_belief *belief)
{
  delete belief;
}

cb_status cb_belief_params(const cb_belief *belief, double *mu, double *sigma)
{
  return guarded([&] {
    require(belief, "belief");
    if (mu)
      *mu = belief->belief.mu();
    if (sigma)
      *sigma = belief->belief.sigma();
  });
}

cb_status cb_belief_pdf(const cb_belief *belief, double rho, double *out)
{
  return guarded([&] {
    require(belief, "belief");
    require(out, "out");
    *out = belief->belief.pdf(rho);
  });
}

cb_status cb_belief_cdf(const cb_belief *belief, double rho, double *out)
{
  return guarded([&] {
    require(belief, "belief");
    require(out, "out");
    *out = belief->belief.cdf(rho);
  });
}

cb_status cb_belief_quantile(const cb_belief *belief, double p, double *out)
{
  return guarded([&] {
    require(belief, "belief");
    require(out, "out");
    *out = belief->belief.quantile(p);
  });
}

cb_status cb_belief_mean(const cb_belief *belief, double *out)
{
  return guarded([&] {
    require(belief, "belief");
    require(out, "out");
    *out = belief->belief.mean();
  });
}

cb_status cb_belief_sample(const cb_belief *belief, uint64_t seed, size_t count, double *out)
{
  return guarded([&] {
    require(belief, "belief");
    if (count > 0)
      require(out, "out");
    auto const draws = belief->belief.sample(seed, count);
    std::copy(draws.begin(), draws.end(), out);
  });
}

cb_status cb_chain_start(uint64_t seed, const char *config_json, cb_chain **out)
{
  return guarded([&] {
    require(out, "out");
    McmcpConfig config;
    if (config_json)
      config = mcmcp_config_from_json(parse_json(config_json));
    *out = new cb_chain{McmcpChain::start(seed, config)};
  });
}

void cb_chain_free(cb_chain *chain)
{
  delete chain;
}

cb_status cb_chain_pending(const cb_chain *chain, size_t *trial_index, double *left_rho,
                           double *right_rho, int *done)
{
  return guarded([&] {
    require(chain, "chain");
    auto const &pending = chain->chain.pending();
    if (done)
      *done = pending ? 0 : 1;
    if (!pending)
      return;
    if (trial_index)
      *trial_index = pending->trial_index;
    if (left_rho)
      *left_rho = pending->left_rho();
    if (right_rho)
      *right_rho = pending->right_rho();
  });
}

cb_status cb_chain_choose(cb_chain *chain, size_t trial_index, cb_side side, double duration_ms)
{
  return guarded([&] {
    require(chain, "chain");
    if (side != CB_LEFT && side != CB_RIGHT)
      throw InvalidArgument("side must be CB_LEFT or CB_RIGHT");
    std::optional<double> duration;
    if (duration_ms >= 0.0)
      duration = duration_ms;
    chain->chain.record_side(trial_index, side == CB_LEFT ? Side::Left : Side::Right, duration);
  });
}

cb_status cb_chain_summarize(const cb_chain *chain, size_t burn_in, double *mean,
                             double *ci_lower, double *ci_upper)
{
  return guarded([&] {
    require(chain, "chain");
    auto const s = chain->chain.summarize(burn_in);
    if (mean)
      *mean = s.mean;
    if (ci_lower)
      *ci_lower = s.ci_lower;
    if (ci_upper)
      *ci_upper = s.ci_upper;
  });
}

cb_status cb_chain_export_jsonl(const cb_chain *chain, char **out)
{
  return guarded([&] {
    require(chain, "chain");
    require(out, "out");
    *out = copy_out(chain->chain.to_json_lines());
  });
}

cb_status cb_dataset_generate_json(double rho_pop, size_t n, uint64_t seed, char **out)
{
  return guarded([&] {
    require(out, "out");
    *out = copy_out(dataset_to_json(generate_dataset(rho_pop, n, seed)).dump());
  });
}

cb_status cb_dataset_generate_csv(double rho_pop, size_t n, uint64_t seed, char **out)
{
  return guarded([&] {
    require(out, "out");
    *out = copy_out(dataset_to_csv(generate_dataset(rho_pop, n, seed)));
  });
}

cb_status cb_congruence_resolve(double prior_mu, int incongruent, double clamp, uint64_t seed,
                                double *out)
{
  return guarded([&] {
    require(out, "out");
    auto const kind = incongruent ? Congruence::Incongruent : Congruence::Congruent;
    *out = resolve_congruence(prior_mu, kind, clamp, seed).resolved_rho;
  });
}

cb_status cb_posterior_json(const char *request_json, char **result_json, char **samples_jsonl)
{
  return guarded([&] {
    require(result_json, "result_json");
    Json const request = parse_arg(request_json, "request_json");
    Model const model = model_from_string(require_string(request, "model"));
    McmcConfig const mcmc = mcmc_config_from_json(request.value("mcmc", Json()));
    std::uint64_t const seed = request.value("seed", std::uint64_t{0});
    auto prior = [&] {
      if (!request.contains("prior"))
        throw ParseError("missing field 'prior'");
      return prior_belief(request.at("prior"));
    };
    auto dataset = [&] {
      if (!request.contains("dataset"))
        throw ParseError("missing field 'dataset'");
      return dataset_from_json(request.at("dataset"));
    };
    PosteriorResult result = [&] {
      switch (model)
      {
      case Model::PriorOnly:
        return prior_only(prior(), mcmc, seed);
      case Model::BayesianInformed:
        return posterior(dataset(), PriorSpec::informed(prior()), mcmc, seed);
      case Model::BayesianUniform:
        break;
      }
      return posterior(dataset(), PriorSpec::uniform(), mcmc, seed);
    }();
    std::string const text = posterior_to_json(result).dump();
    std::string const lines = samples_jsonl ? samples_to_json_lines(result) : std::string();
    char *result_out = copy_out(text);
    if (samples_jsonl)
    {
      try
      {
        *samples_jsonl = copy_out(lines);
      }
      catch (...)
      {
        std::free(result_out);
        throw;
      }
    }
    *result_json = result_out;
  });
}

cb_status cb_mae(double predicted_mean, double elicited_mean, double *out)
{
  return guarded([&] {
    require(out, "out");
    *out = mae(predicted_mean, elicited_mean);
  });
}

cb_status cb_kld_beliefs(const cb_belief *elicited, const cb_belief *predicted,
                         size_t grid_points, double *out)
{
  return guarded([&] {
    require(elicited, "elicited");
    require(predicted, "predicted");
    require(out, "out");
    std::size_t const count = grid_points ? grid_points : RhoGrid::kDefaultCount;
    *out = kld(RhoGrid::from_belief(elicited->belief, count),
               RhoGrid::from_belief(predicted->belief, count));
  });
}

cb_status cb_service_create(const char *options_json, cb_service **out)
{
  return guarded([&] {
    require(out, "out");
    SessionService::Options options;
    if (options_json)
    {
      Json const o = parse_json(options_json);
      if (!o.is_object())
        throw ParseError("service options must be an object");
      if (o.contains("data_dir") && !o.at("data_dir").is_null())
        options.data_dir = require_string(o, "data_dir");
      if (o.contains("trust_client_time"))
      {
        if (!o.at("trust_client_time").is_boolean())
          throw ParseError("trust_client_time must be a boolean");
        options.trust_client_time = o.at("trust_client_time").get<bool>();
      }
    }
    auto handle = std::make_unique<cb_service>();
    handle->service = std::make_unique<SessionService>(std::move(options));
    handle->router = std::make_unique<ApiRouter>(*handle->service);
    *out = handle.release();
  });
}

void cb_service_free(cb_service *service)
{
  delete service;
}

cb_status cb_service_add_study(cb_service *service, const char *study_json)
{
  return guarded([&] {
    require(service, "service");
    service->service->add_study(study_config_from_json(parse_arg(study_json, "study_json")));
  });
}

cb_status cb_service_recover(cb_service *service, size_t *restored)
{
  return guarded([&] {
    require(service, "service");
    std::size_t const n = service->service->recover();
    if (restored)
      *restored = n;
  });
}

cb_status cb_service_handle(cb_service *service, const char *method, const char *path,
                            const char *body, int *http_status, char **response)
{
  return guarded([&] {
    require(service, "service");
    require(method, "method");
    require(path, "path");
    require(http_status, "http_status");
    require(response, "response");
    auto const result = service->router->handle(method, path, body ? body : "");
    *response = copy_out(result.body);
    *http_status = result.status;
  });
}

cb_status cb_validate_study(const char *study_json, char **normalized_json)
{
  return guarded([&] {
    auto const config = study_config_from_json(parse_arg(study_json, "study_json"));
    if (normalized_json)
      *normalized_json = copy_out(study_config_to_json(config).dump(2));
  });
}

cb_status cb_validate_fleet(const char *fleet_json, char **normalized_json)
{
  return guarded([&] {
    auto const fleet = fleet_from_json(parse_arg(fleet_json, "fleet_json"));
    if (normalized_json)
      *normalized_json = copy_out(fleet_to_json(fleet).dump(2));
  });
}

cb_status cb_simulate(const char *study_json, const char *fleet_json, uint64_t seed,
                      unsigned jobs, char **result_json)
{
  return guarded([&] {
    require(result_json, "result_json");
    auto const study = study_config_from_json(parse_arg(study_json, "study_json"));
    auto const fleet = fleet_from_json(parse_arg(fleet_json, "fleet_json"));
    auto const result = simulate_study(study, fleet, seed, jobs);
    Json const out{{"summary",
                    {{"sessions", result.sessions},
                     {"trials", result.trials},
                     {"excluded_sessions", result.excluded_sessions},
                     {"sealed_sessions", result.bundle.sealed_sessions}}},
                   {"files", files_json(result.bundle.files)}};
    *result_json = copy_out(out.dump());
  });
}

cb_status cb_densities(const char *sessions_jsonl, size_t grid_points, char **files_json)
{
  return guarded([&] {
    require(sessions_jsonl, "sessions_jsonl");
    require(files_json, "files_json");
    auto const files = density_tables(sessions_jsonl, grid_points ? grid_points : 201);
    *files_json = copy_out(Json{{"files", ::files_json(files)}}.dump());
  });
}

cb_status cb_scoring_input(const char *sessions_jsonl, const char *mcmc_json, char **input_json)
{
  return guarded([&] {
    require(sessions_jsonl, "sessions_jsonl");
    require(input_json, "input_json");
    McmcConfig const mcmc = mcmc_json ? mcmc_config_from_json(parse_json(mcmc_json)) : McmcConfig{};
    *input_json = copy_out(scoring_input_from_sessions(sessions_jsonl, mcmc).dump());
  });
}

cb_status cb_score(const char *input_json, uint64_t seed, char **scores_csv)
{
  return guarded([&] {
    require(scores_csv, "scores_csv");
    auto const scores = score_trials(parse_arg(input_json, "input_json"), seed);
    *scores_csv = copy_out(scores_to_csv(scores));
  });
}

cb_status cb_generate_batch(const char *config_json, uint64_t seed, char **files_json)
{
  return guarded([&] {
    require(files_json, "files_json");
    Json files = Json::object();
    for (auto const &item : generate_batch(parse_arg(config_json, "config_json"), seed))
    {
      files[item.name + ".csv"] = dataset_to_csv(item.dataset);
      files[item.name + ".json"] = dataset_to_json(item.dataset).dump(2) + "\n";
    }
    *files_json = copy_out(Json{{"files", std::move(files)}}.dump());
  });
}

}  // extern "C"
