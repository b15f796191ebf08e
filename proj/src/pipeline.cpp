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
#include "corrbelief/pipeline.hpp"

#include "corrbelief/errors.hpp"
#include "corrbelief/format.hpp"
#include "corrbelief/random.hpp"
#include "corrbelief/router.hpp"
#include "corrbelief/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

namespace corrbelief {

namespace {

constexpr std::int64_t kSimEpochMs = 1'700'000'000'000;
constexpr std::int64_t kAttentionMs = 15'000;
constexpr std::int64_t kPriorMs = 45'000;
constexpr std::int64_t kViewMs = 30'000;
constexpr std::int64_t kPosteriorMs = 45'000;
constexpr double kChoiceMinMs = 900.0;
constexpr double kChoiceSpreadMs = 1200.0;
constexpr double kMinBandwidth = 0.02;

std::pair<double, double> read_range(Json const &object, char const *key, double lo, double hi)
{
  if (!object.contains(key))
    return {lo, hi};
  auto const &value = object.at(key);
  if (!value.is_array() || value.size() != 2 || !value[0].is_number() || !value[1].is_number())
    throw ParseError(std::string("'") + key + "' must be a [min, max] pair");
  double const a = value[0].get<double>();
  double const b = value[1].get<double>();
  if (!(a <= b))
    throw InvalidArgument(std::string("'") + key + "' range is reversed");
  return {a, b};
}

[[noreturn]] void rethrow_api_error(ApiResponse const &response, std::string const &context)
{
  std::string message = response.body;
  try
  {
    message = Json::parse(response.body).at("error").at("message").get<std::string>();
  }
  catch (std::exception const &)
  {}
  message = context + ": " + message;
  switch (response.status)
  {
  case 400:
    throw InvalidArgument(message);
  case 404:
    throw NotFound(message);
  case 409:
    throw StateError(message);
  default:
    throw Error(message);
  }
}

class SimulatedSession
{
public:
  SimulatedSession(ApiRouter const &router, StudyConfig const &study, AgentGroup const &group,
                   std::string session_id, std::uint64_t seed)
    : router_(router)
    , study_(study)
    , group_(group)
    , session_id_(std::move(session_id))
    , seed_(seed)
  {}

  void run(Json summary)
  {
    for (auto const &item : study_.attention_checks)
    {
      clock_ += kAttentionMs;
      call("/sessions/" + session_id_ + "/attention/" + item.id,
           Json{{"answer", item.answer}, {"at_ms", clock_}}, "attention " + item.id);
    }
    while (!summary.at("trial").is_null())
      summary = step(summary.at("trial"));
  }

private:
  SimulatedParticipant &agent(std::string const &pair_id)
  {
    auto it = agents_.find(pair_id);
    if (it != agents_.end())
      return it->second;
    SimulatedParticipant p{group_.belief.value_or(BoundedNormalBelief(0.0, 1.0)), group_.kind,
                           group_.choice_noise, group_.weight};
    if (!group_.belief)
    {
      Rng rng(derive_seed(seed_, hash_string(pair_id)));
      auto const &r = group_.range;
      double const mu = r.mu_min + (r.mu_max - r.mu_min) * rng.uniform();
      double const sigma = r.sigma_min + (r.sigma_max - r.sigma_min) * rng.uniform();
      p.belief = BoundedNormalBelief(mu, sigma);
    }
    return agents_.emplace(pair_id, p).first->second;
  }

  Json call(std::string const &path, Json const &body, std::string const &context)
  {
    auto const response = router_.handle("POST", path, body.dump());
    if (response.status / 100 != 2)
      rethrow_api_error(response, "session " + session_id_ + " " + context);
    return Json::parse(response.body);
  }

  static Json elicitation_body(ElicitationRecord const &record, std::int64_t at)
  {
    Json body = elicitation_to_json(record);
    body["at_ms"] = at;
    return body;
  }

  Json step(Json const &trial)
  {
    auto const trial_id = trial.at("trial_id").get<std::string>();
    auto const pair_id = trial.at("pair").at("id").get<std::string>();
    auto const stage = trial.at("stage").get<std::string>();
    std::string const base = "/sessions/" + session_id_ + "/trials/" + trial_id;
    std::string const context = "trial " + trial_id;
    auto &participant = agent(pair_id);

    if (stage == to_string(TrialStage::AwaitingPrior))
    {
      clock_ += kPriorMs;
      return call(base + "/prior", elicitation_body(elicit(participant), clock_), context)
        .at("next");
    }
    if (stage == to_string(TrialStage::AwaitingView))
    {
      std::vector<Point> points;
      for (auto const &p : trial.at("view").at("dataset").at("points"))
        points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
      participant =
        update_after_data(participant, CorrelationDataset::from_points(std::move(points)));
      clock_ += kViewMs;
      return call(base + "/view-ack", Json{{"at_ms", clock_}}, context).at("next");
    }
    if (stage == to_string(TrialStage::AwaitingPosterior))
    {
      clock_ += kPosteriorMs;
      return call(base + "/posterior", elicitation_body(elicit(participant), clock_), context)
        .at("next");
    }
    if (stage == to_string(TrialStage::InChain))
    {
      auto const &pending = trial.at("chain").at("pending");
      auto const index = pending.at("trial_index").get<std::size_t>();
      // The agent only sees the two screen positions.
      ChoiceTrial const shown{pending.at("left_rho").get<double>(),
                              pending.at("right_rho").get<double>(), index,
                              PresentationOrder::CurrentLeft};
      std::uint64_t const choice_seed = derive_seed(derive_seed(seed_, hash_string(trial_id)), index);
      Side const side = shown.side_of(answer_choice(participant, shown, choice_seed));
      double const duration = std::round(kChoiceMinMs + kChoiceSpreadMs * Rng(choice_seed ^ 1).uniform());
      clock_ += static_cast<std::int64_t>(duration);
      return call("/sessions/" + session_id_ + "/mcmcp/" + trial_id + "/choice",
                  Json{{"trial_index", index},
                       {"side", to_string(side)},
                       {"duration_ms", duration},
                       {"at_ms", clock_}},
                  context)
        .at("next");
    }
    throw StateError("session " + session_id_ + " " + context + " in unexpected stage " + stage);
  }

  ApiRouter const &router_;
  StudyConfig const &study_;
  AgentGroup const &group_;
  std::string session_id_;
  std::uint64_t seed_;
  std::int64_t clock_ = kSimEpochMs;
  std::map<std::string, SimulatedParticipant> agents_;
};

std::vector<Json> parse_lines(std::string const &text)
{
  std::vector<Json> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);)
    if (line.find_first_not_of(" \t\r") != std::string::npos)
      rows.push_back(parse_json(line));
  return rows;
}

std::string density_csv(char const *column, std::vector<double> const &grid,
                        std::vector<double> const &pre, std::vector<double> const &post)
{
  std::string out = std::string(column) + ",pre_density,post_density\n";
  for (std::size_t i = 0; i < grid.size(); ++i)
  {
    out += format_double(grid[i]);
    out += ',';
    out += pre.empty() ? "" : format_double(pre[i]);
    out += ',';
    out += post.empty() ? "" : format_double(post[i]);
    out += '\n';
  }
  return out;
}

std::vector<double> linspace(double lo, double hi, std::size_t count)
{
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  return out;
}

}  // namespace

std::size_t FleetSpec::total_sessions() const noexcept
{
  std::size_t total = 0;
  for (auto const &g : groups)
    total += g.sessions;
  return total;
}

FleetSpec fleet_from_json(Json const &payload)
{
  if (!payload.is_object() || !payload.contains("groups") || !payload.at("groups").is_array())
    throw ParseError("fleet must be an object with a 'groups' array");
  FleetSpec fleet;
  for (auto const &g : payload.at("groups"))
  {
    if (!g.is_object())
      throw ParseError("fleet groups must be objects");
    AgentGroup group;
    group.kind = agent_kind_from_string(require_string(g, "kind"));
    auto const sessions = require_integer(g, "sessions");
    if (sessions < 0)
      throw InvalidArgument("group session count must be nonnegative");
    group.sessions = static_cast<std::size_t>(sessions);
    if (g.contains("tau"))
      group.choice_noise = require_number(g, "tau");
    if (g.contains("weight"))
      group.weight = require_number(g, "weight");
    if (!(group.choice_noise >= 0.0))
      throw InvalidArgument("tau must be nonnegative");
    if (!(group.weight >= 0.0 && group.weight <= 1.0))
      throw InvalidArgument("weight must lie in [0, 1]");
    if (g.contains("belief"))
      group.belief =
        BoundedNormalBelief(require_number(g.at("belief"), "mu"), require_number(g.at("belief"), "sigma"));
    if (g.contains("belief_range"))
    {
      auto const &r = g.at("belief_range");
      auto [mlo, mhi] = read_range(r, "mu", group.range.mu_min, group.range.mu_max);
      auto [slo, shi] = read_range(r, "sigma", group.range.sigma_min, group.range.sigma_max);
      if (mlo < -1.0 || mhi > 1.0 || slo <= 0.0)
        throw InvalidArgument("belief_range needs mu within [-1, 1] and positive sigma");
      group.range = {mlo, mhi, slo, shi};
    }
    fleet.groups.push_back(group);
  }
  if (fleet.total_sessions() == 0)
    throw InvalidArgument("fleet has no sessions");
  return fleet;
}

Json fleet_to_json(FleetSpec const &fleet)
{
  Json groups = Json::array();
  for (auto const &g : fleet.groups)
  {
    Json item{{"kind", to_string(g.kind)},
              {"sessions", g.sessions},
              {"tau", g.choice_noise},
              {"weight", g.weight}};
    if (g.belief)
      item["belief"] = {{"mu", g.belief->mu()}, {"sigma", g.belief->sigma()}};
    else
      item["belief_range"] = {{"mu", {g.range.mu_min, g.range.mu_max}},
                              {"sigma", {g.range.sigma_min, g.range.sigma_max}}};
    groups.push_back(std::move(item));
  }
  return Json{{"groups", std::move(groups)}};
}

SimulationResult simulate_study(StudyConfig const &study, FleetSpec const &fleet,
                                std::uint64_t seed, unsigned jobs)
{
  if (fleet.total_sessions() == 0)
    throw InvalidArgument("fleet has no sessions");
  if (study.kind != StudyKind::ElicitationComparison)
    for (auto const &g : fleet.groups)
      if (g.kind == AgentKind::LuceResponder && g.sessions > 0)
        throw InvalidArgument("LuceResponder agents cannot update beliefs; use them with "
                              "elicitation-comparison studies");

  SessionService::Options options;
  options.trust_client_time = true;
  options.clock = [] { return kSimEpochMs; };
  SessionService service(options);
  service.add_study(study);
  ApiRouter const router(service);

  struct Pending
  {
    AgentGroup const *group;
    std::string session_id;
    std::uint64_t seed;
    Json summary;
  };
  std::vector<Pending> pending;
  std::size_t ordinal = 0;
  for (auto const &group : fleet.groups)
  {
    for (std::size_t k = 0; k < group.sessions; ++k, ++ordinal)
    {
      std::string const participant = "sim-" + std::to_string(ordinal);
      Json const request{{"study_id", study.study_id},
                         {"participant_id", participant},
                         {"metadata", {{"agent", to_string(group.kind)}}},
                         {"at_ms", kSimEpochMs}};
      auto const response = router.handle("POST", "/sessions", request.dump());
      if (response.status != 201)
        rethrow_api_error(response, "creating session for " + participant);
      Json summary = Json::parse(response.body);
      auto id = summary.at("session_id").get<std::string>();
      pending.push_back({&group, std::move(id), derive_seed(seed, ordinal), std::move(summary)});
    }
  }

  std::atomic<std::size_t> next{0};
  std::mutex failure_mutex;
  std::exception_ptr failure;
  std::size_t failure_index = pending.size();
  auto worker = [&] {
    for (std::size_t i = next++; i < pending.size(); i = next++)
    {
      try
      {
        auto &p = pending[i];
        SimulatedSession session(router, study, *p.group, p.session_id, p.seed);
        session.run(std::move(p.summary));
      }
      catch (...)
      {
        std::lock_guard lock(failure_mutex);
        // Report the earliest failing session so errors do not depend on scheduling.
        if (i < failure_index)
        {
          failure_index = i;
          failure = std::current_exception();
        }
      }
    }
  };
  unsigned const threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(pending.size())));
  if (threads == 1)
  {
    worker();
  }
  else
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back(worker);
  }
  if (failure)
    std::rethrow_exception(failure);

  SimulationResult result;
  result.bundle = service.export_study(study.study_id);
  for (auto const &id : service.session_ids(study.study_id))
  {
    auto const state = service.snapshot(id);
    ++result.sessions;
    result.trials += state.trials.size();
    if (!evaluate_exclusions(state, study).empty())
      ++result.excluded_sessions;
  }
  return result;
}

std::vector<double> kde(std::vector<double> const &values, std::vector<double> const &at)
{
  if (values.empty())
    return {};
  double const n = static_cast<double>(values.size());
  double bandwidth = kMinBandwidth;
  if (values.size() >= 2)
  {
    double const mean = sample_mean(values);
    double ss = 0.0;
    for (double v : values)
      ss += (v - mean) * (v - mean);
    double const sd = std::sqrt(ss / (n - 1.0));
    auto const q = [&] {
      std::vector<double> sorted = values;
      std::sort(sorted.begin(), sorted.end());
      return sorted_quantile(sorted, 0.75) - sorted_quantile(sorted, 0.25);
    }();
    double spread = sd;
    if (q > 0.0)
      spread = std::min(sd, q / 1.34);
    bandwidth = std::max(kMinBandwidth, 0.9 * spread * std::pow(n, -0.2));
  }
  double const norm = 1.0 / (n * bandwidth * std::sqrt(2.0 * std::numbers::pi));
  std::vector<double> out(at.size(), 0.0);
  for (std::size_t i = 0; i < at.size(); ++i)
  {
    double sum = 0.0;
    for (double v : values)
    {
      double const z = (at[i] - v) / bandwidth;
      sum += std::exp(-0.5 * z * z);
    }
    out[i] = sum * norm;
  }
  return out;
}

std::map<std::string, std::string> density_tables(std::string const &sessions_jsonl,
                                                  std::size_t grid_points)
{
  if (grid_points < 2)
    throw InvalidArgument("density grids need at least two points");
  auto const sessions = parse_lines(sessions_jsonl);
  if (sessions.empty())
    throw InvalidArgument("bundle has no sessions");

  struct Samples
  {
    std::vector<double> pre_mean, post_mean, pre_width, post_width;
  };
  std::map<std::string, Samples> pairs;
  for (auto const &s : sessions)
  {
    if (require_string(s, "status") != "sealed")
      throw StateError("session " + require_string(s, "session_id") +
                       " is not sealed; densities need a sealed export");
    for (auto const &t : s.at("trials"))
    {
      auto &bucket = pairs[require_string(t, "pair_id")];
      if (t.contains("prior") && !t.at("prior").is_null())
      {
        auto const r = elicitation_from_json(t.at("prior"));
        bucket.pre_mean.push_back(r.mu);
        bucket.pre_width.push_back(r.ci_width());
      }
      if (t.contains("posterior") && !t.at("posterior").is_null())
      {
        auto const r = elicitation_from_json(t.at("posterior"));
        bucket.post_mean.push_back(r.mu);
        bucket.post_width.push_back(r.ci_width());
      }
    }
  }

  auto const means = linspace(-1.0, 1.0, grid_points);
  auto const widths = linspace(0.0, 2.0, grid_points);
  std::map<std::string, std::string> files;
  for (auto const &[pair, s] : pairs)
  {
    files[pair + "_means.csv"] =
      density_csv("rho", means, kde(s.pre_mean, means), kde(s.post_mean, means));
    files[pair + "_ci_widths.csv"] =
      density_csv("width", widths, kde(s.pre_width, widths), kde(s.post_width, widths));
  }
  return files;
}

std::vector<FitScore> score_trials(Json const &input, std::uint64_t seed)
{
  if (!input.is_object() || !input.contains("trials") || !input.at("trials").is_array())
    throw ParseError("scoring input must be an object with a 'trials' array");
  McmcConfig const mcmc =
    input.contains("mcmc") ? mcmc_config_from_json(input.at("mcmc")) : McmcConfig{};
  std::vector<FitScore> scores;
  std::size_t index = 0;
  for (auto const &t : input.at("trials"))
  {
    auto const id = require_string(t, "trial_id");
    try
    {
      TrialRecord record;
      record.descriptor.trial_id = id;
      record.descriptor.seed = t.contains("seed") ? t.at("seed").get<std::uint64_t>()
                                                  : derive_seed(seed, index);
      record.prior = elicitation_from_json(t.at("prior"));
      record.dataset = dataset_from_json(t.at("dataset"));
      auto const posterior = elicitation_from_json(t.at("posterior"));
      auto const predictions = predict_trial(record, mcmc);
      auto trial_scores = score_trial(id, posterior, predictions);
      scores.insert(scores.end(), trial_scores.begin(), trial_scores.end());
    }
    catch (Json::exception const &e)
    {
      throw ParseError("trial '" + id + "': " + e.what());
    }
    ++index;
  }
  return scores;
}

Json scoring_input_from_sessions(std::string const &sessions_jsonl, McmcConfig const &mcmc)
{
  Json trials = Json::array();
  for (auto const &s : parse_lines(sessions_jsonl))
  {
    auto const session_id = require_string(s, "session_id");
    for (auto const &t : s.at("trials"))
    {
      if (require_string(t, "kind") != to_string(TrialKind::Update) || t.at("posterior").is_null())
        continue;
      trials.push_back({{"trial_id", session_id + "/" + require_string(t, "trial_id")},
                        {"seed", t.at("seed")},
                        {"prior", t.at("prior")},
                        {"posterior", t.at("posterior")},
                        {"dataset", t.at("dataset")}});
    }
  }
  return Json{{"mcmc", mcmc_config_to_json(mcmc)}, {"trials", std::move(trials)}};
}

std::vector<GeneratedDataset> generate_batch(Json const &config, std::uint64_t seed)
{
  if (!config.is_object())
    throw ParseError("generate config must be a JSON object");
  std::vector<GeneratedDataset> out;
  if (config.contains("study_kind"))
  {
    auto const study = study_config_from_json(config);
    if (study.kind != StudyKind::FixedDatasets)
      throw InvalidArgument("only fixed-dataset studies have participant-independent datasets");
    for (auto const &pair : study.pairs)
      out.push_back({pair.id, generate_dataset(*pair.rho_pop, study.dataset_size(pair),
                                               fixed_dataset_seed(study.seed, pair.id))});
    return out;
  }
  if (!config.contains("datasets") || !config.at("datasets").is_array())
    throw ParseError("generate config needs a 'datasets' array or a study config");
  std::uint64_t const base = config.contains("seed") ? config.at("seed").get<std::uint64_t>() : seed;
  for (auto const &d : config.at("datasets"))
  {
    auto const name = require_string(d, "name");
    if (name.empty() || name.find_first_of("/\\") != std::string::npos || name == "." || name == "..")
      throw InvalidArgument("dataset name '" + name + "' is not a plain file name");
    auto const n = require_integer(d, "n");
    if (n < 3)
      throw InvalidArgument("dataset '" + name + "' needs n >= 3");
    std::uint64_t const s =
      d.contains("seed") ? d.at("seed").get<std::uint64_t>() : derive_seed(base, hash_string(name));
    out.push_back({name, generate_dataset(require_number(d, "rho_pop"), static_cast<std::size_t>(n), s)});
  }
  return out;
}

}  // namespace corrbelief
