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
#include "corrbelief/study.hpp"

#include "corrbelief/errors.hpp"
#include "corrbelief/random.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace corrbelief {

char const *to_string(StudyKind kind) noexcept
{
  switch (kind)
  {
  case StudyKind::ElicitationComparison:
    return "ElicitationComparison";
  case StudyKind::FixedDatasets:
    return "FixedDatasets";
  case StudyKind::CongruenceManipulated:
    return "CongruenceManipulated";
  }
  return "unknown";
}

char const *to_string(Treatment treatment) noexcept
{
  switch (treatment)
  {
  case Treatment::Scatter:
    return "Scatter";
  case Treatment::Line:
    return "Line";
  case Treatment::Cone:
    return "Cone";
  case Treatment::HOP:
    return "HOP";
  }
  return "unknown";
}

StudyKind study_kind_from_string(std::string const &text)
{
  for (auto k : {StudyKind::ElicitationComparison, StudyKind::FixedDatasets,
                 StudyKind::CongruenceManipulated})
    if (text == to_string(k))
      return k;
  throw ParseError("unknown study kind '" + text + "'");
}

Treatment treatment_from_string(std::string const &text)
{
  for (auto t : {Treatment::Scatter, Treatment::Line, Treatment::Cone, Treatment::HOP})
    if (text == to_string(t))
      return t;
  throw ParseError("unknown treatment '" + text + "'");
}

VariablePair const &StudyConfig::pair(std::string const &id) const
{
  auto it = std::find_if(pairs.begin(), pairs.end(), [&](auto const &p) { return p.id == id; });
  if (it == pairs.end())
    throw NotFound("no variable pair '" + id + "'");
  return *it;
}

std::size_t StudyConfig::dataset_size(VariablePair const &p) const
{
  return p.n.value_or(sample_sizes.front());
}

void StudyConfig::validate() const
{
  if (study_id.empty())
    throw InvalidArgument("study_id must be nonempty");
  if (study_id.find('/') != std::string::npos)
    throw InvalidArgument("study_id must not contain '/'");
  if (pairs.empty())
    throw InvalidArgument("a study needs at least one variable pair");
  if (treatments.empty())
    throw InvalidArgument("treatments must be nonempty");
  if (sample_sizes.empty())
    throw InvalidArgument("sample_sizes must be nonempty");
  for (auto n : sample_sizes)
    if (n < 3)
      throw InvalidArgument("sample sizes must be at least 3");

  std::set<std::string> ids;
  for (auto const &p : pairs)
  {
    if (p.id.empty() || !ids.insert(p.id).second)
      throw InvalidArgument("variable pair ids must be unique and nonempty");
    if (kind == StudyKind::FixedDatasets)
    {
      if (!p.rho_pop)
        throw InvalidArgument("fixed-dataset studies require rho_pop for pair '" + p.id + "'");
      if (!(std::abs(*p.rho_pop) <= 0.99))
        throw InvalidArgument("rho_pop must satisfy |rho| <= 0.99 for pair '" + p.id + "'");
      if (p.n && *p.n < 3)
        throw InvalidArgument("pair '" + p.id + "' needs n >= 3");
    }
    else if (kind == StudyKind::CongruenceManipulated && p.rho_pop)
    {
      throw InvalidArgument("congruence studies resolve rho_pop per participant; pair '" + p.id +
                            "' must not set it");
    }
  }

  if (rounds.empty())
    throw InvalidArgument("a study needs at least one round");
  std::set<std::string> used;
  for (auto const &r : rounds)
  {
    if (r.pair_ids.empty())
      throw InvalidArgument("rounds must list at least one pair");
    for (auto const &id : r.pair_ids)
    {
      pair(id);
      if (!used.insert(id).second)
        throw InvalidArgument("pair '" + id + "' appears in more than one round");
    }
  }
  if (kind == StudyKind::FixedDatasets && rounds.front().treatment != Treatment::Scatter)
    throw InvalidArgument("the first round of a fixed-dataset study must be Scatter");

  if (mcmcp.target_trials < 2)
    throw InvalidArgument("MCMC-P chains need at least 2 trials");
  if (!(hop_frame_ms > 0.0) || hop_draws == 0)
    throw InvalidArgument("HOP animation needs draws and a positive frame time");
  if (!(congruence_clamp > 0.0 && congruence_clamp < 1.0))
    throw InvalidArgument("congruence clamp must lie in (0, 1)");
  if (!(min_total_ms >= 0.0))
    throw InvalidArgument("min_total_ms must be nonnegative");
}

namespace {

std::vector<Round> default_rounds(StudyConfig const &config)
{
  std::vector<std::string> ids;
  for (auto const &p : config.pairs)
    ids.push_back(p.id);
  if (config.kind != StudyKind::FixedDatasets || ids.size() < 2)
  {
    std::optional<Treatment> t;
    if (config.kind == StudyKind::FixedDatasets)
      t = Treatment::Scatter;
    return {Round{t, ids}};
  }
  auto const half = static_cast<std::ptrdiff_t>(ids.size() / 2);
  return {Round{Treatment::Scatter, {ids.begin(), ids.begin() + half}},
          Round{std::nullopt, {ids.begin() + half, ids.end()}}};
}

std::size_t size_field(Json const &object, char const *key, std::size_t fallback)
{
  if (!object.contains(key))
    return fallback;
  auto const v = require_integer(object, key);
  if (v < 0)
    throw InvalidArgument(std::string(key) + " must be nonnegative");
  return static_cast<std::size_t>(v);
}

double number_field(Json const &object, char const *key, double fallback)
{
  return object.contains(key) ? require_number(object, key) : fallback;
}

}  // namespace

StudyConfig study_config_from_json(Json const &payload)
{
  if (!payload.is_object())
    throw ParseError("study config must be a JSON object");
  StudyConfig config;
  config.study_id = require_string(payload, "study_id");
  config.kind = study_kind_from_string(require_string(payload, "study_kind"));
  if (payload.contains("seed"))
  {
    if (!payload.at("seed").is_number_unsigned() && !payload.at("seed").is_number_integer())
      throw ParseError("seed must be an integer");
    config.seed = payload.at("seed").get<std::uint64_t>();
  }

  if (!payload.contains("variable_pairs") || !payload.at("variable_pairs").is_array())
    throw ParseError("study config needs a 'variable_pairs' array");
  for (auto const &item : payload.at("variable_pairs"))
  {
    VariablePair p;
    p.id = require_string(item, "id");
    p.label_x = item.value("label_x", std::string());
    p.label_y = item.value("label_y", std::string());
    if (item.contains("rho_pop") && !item.at("rho_pop").is_null())
      p.rho_pop = require_number(item, "rho_pop");
    if (item.contains("n"))
      p.n = size_field(item, "n", 0);
    config.pairs.push_back(std::move(p));
  }

  if (!payload.contains("treatments") || !payload.at("treatments").is_array())
    throw ParseError("study config needs a 'treatments' array");
  for (auto const &t : payload.at("treatments"))
  {
    if (!t.is_string())
      throw ParseError("treatments must be strings");
    config.treatments.push_back(treatment_from_string(t.get<std::string>()));
  }

  if (payload.contains("sample_sizes"))
  {
    config.sample_sizes.clear();
    for (auto const &n : payload.at("sample_sizes"))
    {
      if (!n.is_number_integer() || n.get<std::int64_t>() < 0)
        throw ParseError("sample_sizes must be nonnegative integers");
      config.sample_sizes.push_back(n.get<std::size_t>());
    }
  }

  if (payload.contains("rounds"))
  {
    for (auto const &r : payload.at("rounds"))
    {
      Round round;
      auto const t = require_string(r, "treatment");
      if (t != "assigned")
        round.treatment = treatment_from_string(t);
      if (!r.contains("pairs") || !r.at("pairs").is_array())
        throw ParseError("each round needs a 'pairs' array");
      for (auto const &id : r.at("pairs"))
      {
        if (!id.is_string())
          throw ParseError("round pairs must be ids");
        round.pair_ids.push_back(id.get<std::string>());
      }
      config.rounds.push_back(std::move(round));
    }
  }
  else
  {
    config.rounds = default_rounds(config);
  }

  if (payload.contains("attention_checks"))
  {
    for (auto const &item : payload.at("attention_checks"))
      config.attention_checks.push_back({require_string(item, "id"),
                                         item.value("question", std::string()),
                                         require_string(item, "answer")});
  }

  if (payload.contains("mcmc"))
    config.mcmc = mcmc_config_from_json(payload.at("mcmc"));
  if (payload.contains("mcmcp"))
    config.mcmcp = mcmcp_config_from_json(payload.at("mcmcp"));
  if (payload.contains("exclusion"))
  {
    auto const &e = payload.at("exclusion");
    config.exclusion.streak = size_field(e, "streak", config.exclusion.streak);
    config.exclusion.alternation = size_field(e, "alternation", config.exclusion.alternation);
    config.exclusion.fast_median_ms =
      number_field(e, "fast_median_ms", config.exclusion.fast_median_ms);
    config.min_total_ms = number_field(e, "min_total_ms", config.min_total_ms);
  }
  config.hop_draws = size_field(payload, "hop_draws", config.hop_draws);
  config.hop_frame_ms = number_field(payload, "hop_frame_ms", config.hop_frame_ms);
  config.congruence_clamp = number_field(payload, "congruence_clamp", config.congruence_clamp);

  config.validate();
  return config;
}

Json study_config_to_json(StudyConfig const &config)
{
  Json pairs = Json::array();
  for (auto const &p : config.pairs)
  {
    Json item{{"id", p.id}, {"label_x", p.label_x}, {"label_y", p.label_y}};
    if (p.rho_pop)
      item["rho_pop"] = *p.rho_pop;
    if (p.n)
      item["n"] = *p.n;
    pairs.push_back(std::move(item));
  }
  Json treatments = Json::array();
  for (auto t : config.treatments)
    treatments.push_back(to_string(t));
  Json rounds = Json::array();
  for (auto const &r : config.rounds)
    rounds.push_back(
      {{"treatment", r.treatment ? to_string(*r.treatment) : "assigned"}, {"pairs", r.pair_ids}});
  Json checks = Json::array();
  for (auto const &a : config.attention_checks)
    checks.push_back({{"id", a.id}, {"question", a.question}, {"answer", a.answer}});

  return Json{
    {"study_id", config.study_id},
    {"study_kind", to_string(config.kind)},
    {"seed", config.seed},
    {"variable_pairs", std::move(pairs)},
    {"treatments", std::move(treatments)},
    {"rounds", std::move(rounds)},
    {"sample_sizes", config.sample_sizes},
    {"attention_checks", std::move(checks)},
    {"mcmc", mcmc_config_to_json(config.mcmc)},
    {"mcmcp", mcmcp_config_to_json(config.mcmcp)},
    {"exclusion",
     {{"streak", config.exclusion.streak},
      {"alternation", config.exclusion.alternation},
      {"fast_median_ms", config.exclusion.fast_median_ms},
      {"min_total_ms", config.min_total_ms}}},
    {"hop_draws", config.hop_draws},
    {"hop_frame_ms", config.hop_frame_ms},
    {"congruence_clamp", config.congruence_clamp}};
}

std::uint64_t fixed_dataset_seed(std::uint64_t study_seed, std::string const &pair_id)
{
  return derive_seed(study_seed, hash_string(pair_id));
}

}  // namespace corrbelief
