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
#pragma once

// Batch workflows behind the command-line tool: simulated studies, density
// summaries, rescoring and dataset batches. All of them are pure functions of
// their inputs and seed; writing files is left to the caller.

#include "corrbelief/agent.hpp"
#include "corrbelief/service.hpp"
#include "corrbelief/study.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace corrbelief {

struct BeliefRange
{
  double mu_min = -0.6;
  double mu_max = 0.6;
  double sigma_min = 0.08;
  double sigma_max = 0.25;
};

/// Sessions driven by one kind of simulated participant. Each agent holds an
/// independent belief per variable pair: `belief` when given, otherwise a
/// seeded draw from `range`.
struct AgentGroup
{
  AgentKind kind = AgentKind::BayesianAgent;
  std::size_t sessions = 1;
  double choice_noise = 1.0;
  double weight = 0.0;
  std::optional<BoundedNormalBelief> belief;
  BeliefRange range;
};

struct FleetSpec
{
  std::vector<AgentGroup> groups;

  std::size_t total_sessions() const noexcept;
};

/// {"groups": [{kind, sessions, tau?, weight?, belief?: {mu, sigma},
/// belief_range?: {mu: [lo, hi], sigma: [lo, hi]}}]}. Throws InvalidArgument
/// for an empty fleet.
FleetSpec fleet_from_json(Json const &payload);
Json fleet_to_json(FleetSpec const &fleet);

struct SimulationResult
{
  ExportBundle bundle;
  std::size_t sessions = 0;
  std::size_t trials = 0;
  std::size_t excluded_sessions = 0;
};

/// Runs every fleet session through the API router in-process, on a virtual
/// clock, with up to `jobs` sessions in flight. Output is independent of
/// `jobs`.
SimulationResult simulate_study(StudyConfig const &study, FleetSpec const &fleet,
                                std::uint64_t seed, unsigned jobs = 1);

/// Gaussian kernel density estimate with Silverman's bandwidth, evaluated at
/// `at`. Returns an empty vector for empty input.
std::vector<double> kde(std::vector<double> const &values, std::vector<double> const &at);

/// Per variable pair, densities of elicited means (grid on [-1, 1]) and of CI
/// widths (grid on [0, 2]) before and after the data. Keys are file names
/// `<pair>_means.csv` and `<pair>_ci_widths.csv`. `sessions_jsonl` is the
/// bundle's session table; unsealed sessions are rejected.
std::map<std::string, std::string> density_tables(std::string const &sessions_jsonl,
                                                  std::size_t grid_points = 201);

/// Scores elicited posteriors against the three models.
/// Input: {"mcmc"?: {...}, "trials": [{trial_id, prior, posterior, dataset,
/// seed?}]}, where prior/posterior are elicitations and dataset uses the
/// dataset wire form. A missing trial seed is derived from `seed`.
std::vector<FitScore> score_trials(Json const &input, std::uint64_t seed);

/// Rescoring input rebuilt from a bundle's session table; reproduces the
/// bundle's scores.
Json scoring_input_from_sessions(std::string const &sessions_jsonl, McmcConfig const &mcmc);

struct GeneratedDataset
{
  std::string name;
  CorrelationDataset dataset;
};

/// Either a study config (one dataset per pair, as participants see it) or
/// {"seed"?, "datasets": [{name, rho_pop, n, seed?}]}.
std::vector<GeneratedDataset> generate_batch(Json const &config, std::uint64_t seed);

}  // namespace corrbelief
