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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace corrbelief {

class Rng;

enum class Choice
{
  Current,
  Proposal
};

enum class Side
{
  Left,
  Right
};

enum class PresentationOrder
{
  CurrentLeft,
  CurrentRight
};

/// What happens when a Normal proposal lands outside [-1, 1].
enum class BoundaryPolicy
{
  /// Fold back into the interval. The folded Gaussian kernel is symmetric,
  /// so a Barker responder keeps its belief as the stationary distribution.
  Reflect,
  /// Redraw up to `max_resamples` times, then reflect. The effective kernel
  /// is a renormalized truncated Gaussian, which is not symmetric near the
  /// edges.
  ResampleThenReflect
};

char const *to_string(Side side) noexcept;
Side side_from_string(std::string const &text);

/// One forced-choice screen: the previously chosen value against a proposal.
struct ChoiceTrial
{
  double option_current;
  double option_proposal;
  std::size_t trial_index;
  PresentationOrder order;

  double left_rho() const noexcept;
  double right_rho() const noexcept;
  Choice choice_for(Side side) const noexcept;
  Side side_of(Choice choice) const noexcept;

  friend bool operator==(ChoiceTrial const &, ChoiceTrial const &) = default;
};

struct McmcpConfig
{
  std::size_t target_trials = 100;
  double initial_width = 0.3;
  double min_width = 0.01;
  double max_width = 1.0;
  double target_acceptance = 0.44;
  std::size_t adapt_every = 10;
  /// Width is multiplied by exp(+/- adapt_step) at each adaptation.
  double adapt_step = 0.1;
  BoundaryPolicy boundary = BoundaryPolicy::Reflect;
  int max_resamples = 100;
};

struct ResponseRecord
{
  Choice choice;
  Side side;
  std::optional<double> duration_ms;

  friend bool operator==(ResponseRecord const &, ResponseRecord const &) = default;
};

struct ChainSummary
{
  double mean;
  double ci_lower;
  double ci_upper;
  std::size_t n_states;
};

/// Mean and 2.5% / 97.5% empirical quantiles over states[burn_in..].
/// Throws InvalidArgument when fewer than two states remain.
ChainSummary summarize_states(std::span<double const> states, std::size_t burn_in = 0);

/// Markov chain whose acceptance step is a responder's forced choice.
///
/// The chain owns its seed; the randomness for trial t is derived from
/// (seed, t), so replaying the same choices reproduces the chain exactly.
/// A chain is a single-writer state machine: `record_choice` must be called
/// with the currently pending trial.
class McmcpChain
{
public:
  /// First trial offers one draw from (0, 1] and one from [-1, 0).
  /// Throws InvalidArgument if target_trials < 2.
  static McmcpChain start(std::uint64_t seed, McmcpConfig config = {});

  /// Appends the chosen value, adapts the width every `adapt_every`
  /// proposal trials, and generates the next trial. Returns the next trial,
  /// or nullopt once the chain is complete. Throws StateError for a stale or
  /// mismatched trial or a choice after completion.
  std::optional<ChoiceTrial> record_choice(ChoiceTrial const &trial, Choice chosen,
                                           std::optional<double> duration_ms = std::nullopt);

  /// Wire-level variant: the responder reports a screen side for a trial index.
  std::optional<ChoiceTrial> record_side(std::size_t trial_index, Side side,
                                         std::optional<double> duration_ms = std::nullopt);

  std::optional<ChoiceTrial> const &pending() const noexcept { return pending_; }
  bool done() const noexcept { return !pending_.has_value(); }

  std::uint64_t seed() const noexcept { return seed_; }
  McmcpConfig const &config() const noexcept { return config_; }
  std::span<double const> states() const noexcept { return states_; }
  std::span<double const> width_history() const noexcept { return width_history_; }
  std::span<ResponseRecord const> responses() const noexcept { return responses_; }
  std::span<ChoiceTrial const> trials() const noexcept { return trials_; }
  double proposal_width() const noexcept { return width_; }
  std::size_t accept_count() const noexcept { return accept_count_; }
  std::size_t trial_index() const noexcept { return states_.size(); }
  std::size_t target_trials() const noexcept { return config_.target_trials; }

  /// Mean and 2.5% / 97.5% empirical quantiles over states[burn_in..].
  /// Throws InvalidArgument when fewer than two states remain.
  ChainSummary summarize(std::size_t burn_in = 0) const;

  /// One JSON object per line: trial_index, state, width, choice, side, duration_ms.
  std::string to_json_lines() const;

private:
  McmcpChain(std::uint64_t seed, McmcpConfig config);

  ChoiceTrial make_trial(std::size_t index, double current) const;
  double propose(Rng &rng, double current) const;

  std::uint64_t seed_;
  McmcpConfig config_;
  std::vector<double> states_;
  std::vector<double> width_history_;
  std::vector<ResponseRecord> responses_;
  std::vector<ChoiceTrial> trials_;
  std::optional<ChoiceTrial> pending_;
  double width_;
  std::size_t accept_count_ = 0;
  std::size_t window_trials_ = 0;
  std::size_t window_accepts_ = 0;
};

enum class McmcpFlag
{
  Streak,
  Alternation,
  FastResponse
};

char const *to_string(McmcpFlag flag) noexcept;

struct ExclusionThresholds
{
  std::size_t streak = 20;
  std::size_t alternation = 20;
  double fast_median_ms = 300.0;
};

/// Streak: a run of at least `streak` identical screen sides.
/// Alternation: a run of at least `alternation` responses where every side
/// differs from the previous one.
/// FastResponse: median recorded duration below `fast_median_ms`.
std::vector<McmcpFlag> detect_invalid(std::span<ResponseRecord const> responses,
                                      ExclusionThresholds const &thresholds = {});

}  // namespace corrbelief
