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
#include "corrbelief/serialization.hpp"

#include "corrbelief/errors.hpp"

namespace corrbelief {

double require_number(Json const &object, char const *key)
{
  if (!object.is_object() || !object.contains(key) || !object.at(key).is_number())
    throw ParseError(std::string("expected numeric field '") + key + "'");
  return object.at(key).get<double>();
}

std::string require_string(Json const &object, char const *key)
{
  if (!object.is_object() || !object.contains(key) || !object.at(key).is_string())
    throw ParseError(std::string("expected string field '") + key + "'");
  return object.at(key).get<std::string>();
}

std::int64_t require_integer(Json const &object, char const *key)
{
  if (!object.is_object() || !object.contains(key) || !object.at(key).is_number_integer())
    throw ParseError(std::string("expected integer field '") + key + "'");
  return object.at(key).get<std::int64_t>();
}

Json parse_json(std::string const &text)
{
  try
  {
    return Json::parse(text);
  }
  catch (nlohmann::json::parse_error const &e)
  {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
}

Json elicitation_to_json(ElicitationRecord const &record)
{
  return Json{{"mu", record.mu}, {"b_lower", record.b_lower}, {"b_upper", record.b_upper}};
}

ElicitationRecord elicitation_from_json(Json const &payload)
{
  return fit_from_elicitation(require_number(payload, "mu"), require_number(payload, "b_lower"),
                              require_number(payload, "b_upper"));
}

Json dataset_to_json(CorrelationDataset const &dataset)
{
  Json points = Json::array();
  for (auto const &p : dataset.points)
    points.push_back(Json::array({p.x, p.y}));
  return Json{{"n", dataset.n()},
              {"rho_pop", dataset.rho_pop},
              {"r_sample", dataset.r_sample},
              {"points", std::move(points)}};
}

CorrelationDataset dataset_from_json(Json const &payload)
{
  if (!payload.is_object() || !payload.contains("points") || !payload.at("points").is_array())
    throw ParseError("dataset must carry a 'points' array");
  std::vector<Point> points;
  for (auto const &p : payload.at("points"))
  {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
      throw ParseError("dataset points must be [x, y] pairs");
    points.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  double const rho_pop = payload.contains("rho_pop") && payload.at("rho_pop").is_number()
                           ? payload.at("rho_pop").get<double>()
                           : 0.0;
  if (points.size() < 3)
    throw InvalidArgument("a dataset needs at least 3 points");
  // Points are kept verbatim so a round trip reproduces the dataset bit for bit.
  double const r = pearson(points);
  return CorrelationDataset{std::move(points), rho_pop, r};
}

Json grid_to_json(RhoGrid const &grid)
{
  return Json{{"points", std::vector<double>(grid.points().begin(), grid.points().end())},
              {"densities", std::vector<double>(grid.densities().begin(), grid.densities().end())}};
}

Json mcmc_config_to_json(McmcConfig const &config)
{
  return Json{{"chains", config.chains},
              {"samples_per_chain", config.samples_per_chain},
              {"burn_in", config.burn_in},
              {"proposal_width", config.proposal_width}};
}

McmcConfig mcmc_config_from_json(Json const &payload, McmcConfig defaults)
{
  if (payload.is_null())
    return defaults;
  if (!payload.is_object())
    throw ParseError("MCMC configuration must be an object");
  auto count = [&](char const *key, std::size_t fallback) -> std::size_t {
    if (!payload.contains(key))
      return fallback;
    auto const v = require_integer(payload, key);
    if (v < 0)
      throw InvalidArgument(std::string(key) + " must be nonnegative");
    return static_cast<std::size_t>(v);
  };
  defaults.chains = count("chains", defaults.chains);
  defaults.samples_per_chain = count("samples_per_chain", defaults.samples_per_chain);
  defaults.burn_in = count("burn_in", defaults.burn_in);
  if (payload.contains("proposal_width"))
    defaults.proposal_width = require_number(payload, "proposal_width");
  if (defaults.chains == 0 || defaults.samples_per_chain == 0 || !(defaults.proposal_width > 0))
    throw InvalidArgument("MCMC configuration needs chains, samples and a positive width");
  return defaults;
}

Json mcmcp_config_to_json(McmcpConfig const &config)
{
  return Json{{"trials", config.target_trials},
              {"initial_width", config.initial_width},
              {"target_acceptance", config.target_acceptance},
              {"adapt_every", config.adapt_every},
              {"boundary", config.boundary == BoundaryPolicy::Reflect ? "reflect" : "resample"}};
}

McmcpConfig mcmcp_config_from_json(Json const &payload, McmcpConfig defaults)
{
  if (payload.is_null())
    return defaults;
  if (!payload.is_object())
    throw ParseError("MCMC-P configuration must be an object");
  auto count = [&](char const *key, std::size_t fallback) -> std::size_t {
    if (!payload.contains(key))
      return fallback;
    auto const v = require_integer(payload, key);
    if (v < 0)
      throw InvalidArgument(std::string(key) + " must be nonnegative");
    return static_cast<std::size_t>(v);
  };
  defaults.target_trials = count("trials", defaults.target_trials);
  defaults.adapt_every = count("adapt_every", defaults.adapt_every);
  if (payload.contains("initial_width"))
    defaults.initial_width = require_number(payload, "initial_width");
  if (payload.contains("target_acceptance"))
    defaults.target_acceptance = require_number(payload, "target_acceptance");
  if (payload.contains("boundary"))
  {
    auto const b = require_string(payload, "boundary");
    if (b == "reflect")
      defaults.boundary = BoundaryPolicy::Reflect;
    else if (b == "resample")
      defaults.boundary = BoundaryPolicy::ResampleThenReflect;
    else
      throw ParseError("boundary must be \"reflect\" or \"resample\"");
  }
  return defaults;
}

Json posterior_to_json(PosteriorResult const &result)
{
  return Json{{"model", to_string(result.model)},
              {"mean", result.mean},
              {"ci", Json::array({result.ci.lower, result.ci.upper})},
              {"grid", grid_to_json(result.grid)},
              {"config", mcmc_config_to_json(result.config)},
              {"acceptance_rate", result.acceptance_rate}};
}

std::string samples_to_json_lines(PosteriorResult const &result)
{
  std::string out;
  for (std::size_t i = 0; i < result.samples.size(); ++i)
  {
    out += Json{{"index", i}, {"rho", result.samples[i]}}.dump();
    out += '\n';
  }
  return out;
}

Json choice_trial_to_json(ChoiceTrial const &trial)
{
  return Json{{"trial_index", trial.trial_index},
              {"left_rho", trial.left_rho()},
              {"right_rho", trial.right_rho()}};
}

}  // namespace corrbelief
