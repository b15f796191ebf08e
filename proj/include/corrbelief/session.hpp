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

#include "corrbelief/bayes.hpp"
#include "corrbelief/belief.hpp"
#include "corrbelief/dataset.hpp"
#include "corrbelief/mcmcp.hpp"
#include "corrbelief/metrics.hpp"
#include "corrbelief/serialization.hpp"
#include "corrbelief/study.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace corrbelief {

enum class TrialKind
{
  /// Line+Cone prior only (elicitation-comparison studies).
  LineCone,
  /// Forced-choice chain (elicitation-comparison studies).
  Mcmcp,
  /// Prior elicitation, visualization, posterior elicitation.
  Update
};

enum class TrialStage
{
  AwaitingPrior,
  AwaitingView,
  AwaitingPosterior,
  InChain,
  Complete
};

char const *to_string(TrialKind kind) noexcept;
char const *to_string(TrialStage stage) noexcept;

struct CongruenceCell
{
  Congruence kind;
  std::size_t n;
};

struct TrialDescriptor
{
  std::string trial_id;
  TrialKind kind;
  std::string pair_id;
  std::size_t round;
  Treatment treatment;
  std::size_t n = 0;
  std::optional<double> rho_pop;
  std::optional<CongruenceCell> cell;
  std::uint64_t seed = 0;
};

/// Parameters the client needs to draw the treatment's overlay, taken from
/// the Uniform-prior posterior.
struct Overlay
{
  double mean_rho;
  std::optional<Interval> ci;
  std::vector<double> hop_draws;
  std::optional<double> frame_ms;
};

struct TrialRecord
{
  TrialDescriptor descriptor;
  TrialStage stage = TrialStage::AwaitingPrior;
  std::optional<ElicitationRecord> prior;
  std::optional<ElicitationRecord> posterior;
  std::optional<CongruenceSpec> congruence;
  std::optional<CorrelationDataset> dataset;
  std::optional<Overlay> overlay;
  std::optional<McmcpChain> chain;
  std::optional<std::int64_t> prior_at_ms;
  std::optional<std::int64_t> view_at_ms;
  std::optional<std::int64_t> posterior_at_ms;
  std::vector<FitScore> scores;
};

struct SessionState
{
  std::string session_id;
  std::string participant_id;
  std::string study_id;
  std::size_t assignment_index = 0;
  Treatment assigned_treatment = Treatment::Scatter;
  std::uint64_t seed = 0;
  std::vector<TrialRecord> trials;
  std::size_t cursor = 0;
  bool sealed = false;
  std::int64_t created_at_ms = 0;
  std::optional<std::int64_t> sealed_at_ms;
  std::map<std::string, std::string> attention_answers;
  Json metadata = Json::object();
  /// Every accepted event, in order. Replaying them rebuilds this state.
  std::vector<Json> events;

  TrialRecord const &trial(std::string const &trial_id) const;
  TrialRecord const *current() const noexcept;
};

/// Treatment for the i-th session of a study: permuted blocks of all
/// treatments, so counts never differ by more than one within a block.
Treatment assign_treatment(StudyConfig const &config, std::size_t assignment_index);

/// Seed of a participant's session; the participant id salts the study seed.
std::uint64_t session_seed(StudyConfig const &config, std::string const &participant_id);

/// Materializes the per-participant trial plan (seeded permutations).
std::vector<TrialDescriptor> plan_trials(StudyConfig const &config, std::uint64_t seed,
                                         Treatment assigned);

/// Event constructors. `at_ms` is the server-side timestamp of the event.
Json make_created_event(std::string const &session_id, std::string const &participant_id,
                        std::string const &study_id, std::size_t assignment_index,
                        std::int64_t at_ms, Json metadata);
Json make_prior_event(std::string const &trial_id, Json const &payload, std::int64_t at_ms);
Json make_view_event(std::string const &trial_id, std::int64_t at_ms);
Json make_posterior_event(std::string const &trial_id, Json const &payload, std::int64_t at_ms);
Json make_choice_event(std::string const &chain_id, std::size_t trial_index, Side side,
                       std::optional<double> duration_ms, std::int64_t at_ms);
Json make_attention_event(std::string const &item_id, std::string const &answer,
                          std::int64_t at_ms);

/// Builds the initial state from a session_created event.
SessionState start_session(StudyConfig const &config, Json const &created_event);

/// The only mutation path. Validates the event against the state, then
/// applies it; on error the state is unchanged (strong guarantee).
void apply_event(SessionState &state, StudyConfig const &config, Json const &event);

/// Rebuilds a session from its event log.
SessionState replay(StudyConfig const &config, std::span<Json const> events);

enum class ExclusionFlag
{
  FailedAttentionCheck,
  TooFast,
  McmcpInvalid,
  IncompleteTrials
};

char const *to_string(ExclusionFlag flag) noexcept;

std::set<ExclusionFlag> evaluate_exclusions(SessionState const &state, StudyConfig const &config);

/// Full compacted snapshot (everything except the raw event list).
Json session_to_json(SessionState const &state);

/// What a participant sees after submitting a prior.
Json dataset_view_json(TrialRecord const &trial, VariablePair const &pair);

/// Predictions of the three models for an Update trial with a prior and a
/// dataset (deterministic per trial seed).
std::vector<PosteriorResult> predict_trial(TrialRecord const &trial, McmcConfig const &mcmc);

}  // namespace corrbelief
