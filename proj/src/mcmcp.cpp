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
#include "corrbelief/mcmcp.hpp"

#include "corrbelief/errors.hpp"
#include "corrbelief/random.hpp"
#include "corrbelief/stats.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>

namespace corrbelief {

namespace {

double reflect_into_unit(double value)
{
  // Folding is periodic with period 4; reduce first so huge draws terminate.
  if (std::abs(value) > 3.0)
    value = std::remainder(value, 4.0);
  while (value > 1.0 || value < -1.0)
  {
    if (value > 1.0)
      value = 2.0 - value;
    if (value < -1.0)
      value = -2.0 - value;
  }
  return value;
}

}  // namespace

char const *to_string(Side side) noexcept
{
  return side == Side::Left ? "left" : "right";
}

Side side_from_string(std::string const &text)
{
  if (text == "left")
    return Side::Left;
  if (text == "right")
    return Side::Right;
  throw ParseError("side must be \"left\" or \"right\", got '" + text + "'");
}

char const *to_string(McmcpFlag flag) noexcept
{
  switch (flag)
  {
  case McmcpFlag::Streak:
    return "Streak";
  case McmcpFlag::Alternation:
    return "Alternation";
  case McmcpFlag::FastResponse:
    return "FastResponse";
  }
  return "unknown";
}

double ChoiceTrial::left_rho() const noexcept
{
  return order == PresentationOrder::CurrentLeft ? option_current : option_proposal;
}

double ChoiceTrial::right_rho() const noexcept
{
  return order == PresentationOrder::CurrentLeft ? option_proposal : option_current;
}

Choice ChoiceTrial::choice_for(Side side) const noexcept
{
  bool const current_on_left = order == PresentationOrder::CurrentLeft;
  return (side == Side::Left) == current_on_left ? Choice::Current : Choice::Proposal;
}

Side ChoiceTrial::side_of(Choice choice) const noexcept
{
  bool const current_on_left = order == PresentationOrder::CurrentLeft;
  return (choice == Choice::Current) == current_on_left ? Side::Left : Side::Right;
}

McmcpChain::McmcpChain(std::uint64_t seed, McmcpConfig config)
  : seed_(seed), config_(config), width_(config.initial_width)
{
}

McmcpChain McmcpChain::start(std::uint64_t seed, McmcpConfig config)
{
  if (config.target_trials < 2)
    throw InvalidArgument("an MCMC-P chain needs at least 2 trials");
  if (!(config.min_width > 0.0 && config.min_width <= config.max_width))
    throw InvalidArgument("proposal width bounds must satisfy 0 < min <= max");
  if (config.adapt_every == 0)
    throw InvalidArgument("adaptation interval must be positive");
  config.initial_width = std::clamp(config.initial_width, config.min_width, config.max_width);

  McmcpChain chain(seed, config);
  Rng rng(derive_seed(seed, 0));
  double const positive = 1.0 - rng.uniform();
  double const negative = -1.0 + rng.uniform();
  auto const order = rng.bernoulli(0.5) ? PresentationOrder::CurrentLeft
                                        : PresentationOrder::CurrentRight;
  chain.pending_ = ChoiceTrial{positive, negative, 0, order};
  chain.trials_.push_back(*chain.pending_);
  return chain;
}

double McmcpChain::propose(Rng &rng, double current) const
{
  double draw = rng.normal(current, width_);
  if (config_.boundary == BoundaryPolicy::ResampleThenReflect)
  {
    for (int i = 0; i < config_.max_resamples && (draw > 1.0 || draw < -1.0); ++i)
      draw = rng.normal(current, width_);
  }
  return reflect_into_unit(draw);
}

ChoiceTrial McmcpChain::make_trial(std::size_t index, double current) const
{
  Rng rng(derive_seed(seed_, index));
  auto const order = rng.bernoulli(0.5) ? PresentationOrder::CurrentLeft
                                        : PresentationOrder::CurrentRight;
  double proposal = propose(rng, current);
  while (proposal == current)
    proposal = propose(rng, current);
  return ChoiceTrial{current, proposal, index, order};
}

std::optional<ChoiceTrial> McmcpChain::record_choice(ChoiceTrial const &trial, Choice chosen,
                                                     std::optional<double> duration_ms)
{
  if (!pending_)
    throw StateError("chain is complete; no further choices accepted");
  if (!(trial == *pending_))
    throw StateError("choice refers to trial " + std::to_string(trial.trial_index) +
                     " but trial " + std::to_string(pending_->trial_index) + " is pending");
  if (duration_ms && !(*duration_ms >= 0.0 && std::isfinite(*duration_ms)))
    throw InvalidArgument("response duration must be finite and nonnegative");

  double const value = chosen == Choice::Current ? trial.option_current : trial.option_proposal;
  states_.push_back(value);
  responses_.push_back({chosen, trial.side_of(chosen), duration_ms});

  // The opening screen has no incumbent, so it does not count as a proposal.
  if (trial.trial_index > 0)
  {
    bool const accepted = chosen == Choice::Proposal;
    accept_count_ += accepted ? 1 : 0;
    window_accepts_ += accepted ? 1 : 0;
    ++window_trials_;
    if (window_trials_ == config_.adapt_every)
    {
      double const rate =
        static_cast<double>(window_accepts_) / static_cast<double>(window_trials_);
      if (rate > config_.target_acceptance)
        width_ *= std::exp(config_.adapt_step);
      else if (rate < config_.target_acceptance)
        width_ *= std::exp(-config_.adapt_step);
      width_ = std::clamp(width_, config_.min_width, config_.max_width);
      window_trials_ = 0;
      window_accepts_ = 0;
    }
  }
  width_history_.push_back(width_);

  if (states_.size() >= config_.target_trials)
  {
    pending_.reset();
    return std::nullopt;
  }
  pending_ = make_trial(states_.size(), value);
  trials_.push_back(*pending_);
  return pending_;
}

std::optional<ChoiceTrial> McmcpChain::record_side(std::size_t trial_index, Side side,
                                                   std::optional<double> duration_ms)
{
  if (!pending_)
    throw StateError("chain is complete; no further choices accepted");
  if (trial_index != pending_->trial_index)
    throw StateError("choice refers to trial " + std::to_string(trial_index) + " but trial " +
                     std::to_string(pending_->trial_index) + " is pending");
  ChoiceTrial const trial = *pending_;
  return record_choice(trial, trial.choice_for(side), duration_ms);
}

ChainSummary summarize_states(std::span<double const> states, std::size_t burn_in)
{
  if (states.size() < burn_in + 2)
    throw InvalidArgument("summary needs at least two states after burn-in");
  auto const kept = states.subspan(burn_in);
  auto const ci = central_95(kept);
  return ChainSummary{sample_mean(kept), ci.lower, ci.upper, kept.size()};
}

ChainSummary McmcpChain::summarize(std::size_t burn_in) const
{
  return summarize_states(states_, burn_in);
}

std::string McmcpChain::to_json_lines() const
{
  std::string out;
  for (std::size_t i = 0; i < states_.size(); ++i)
  {
    nlohmann::ordered_json line;
    line["trial_index"] = i;
    line["state"] = states_[i];
    line["width"] = width_history_[i];
    line["choice"] = responses_[i].choice == Choice::Current ? "current" : "proposal";
    line["side"] = to_string(responses_[i].side);
    if (responses_[i].duration_ms)
      line["duration_ms"] = *responses_[i].duration_ms;
    else
      line["duration_ms"] = nullptr;
    out += line.dump();
    out += '\n';
  }
  return out;
}

std::vector<McmcpFlag> detect_invalid(std::span<ResponseRecord const> responses,
                                      ExclusionThresholds const &thresholds)
{
  std::vector<McmcpFlag> flags;
  std::size_t longest_streak = responses.empty() ? 0 : 1;
  std::size_t longest_alternation = longest_streak;
  std::size_t streak = longest_streak;
  std::size_t alternation = longest_streak;
  for (std::size_t i = 1; i < responses.size(); ++i)
  {
    if (responses[i].side == responses[i - 1].side)
    {
      ++streak;
      alternation = 1;
    }
    else
    {
      ++alternation;
      streak = 1;
    }
    longest_streak = std::max(longest_streak, streak);
    longest_alternation = std::max(longest_alternation, alternation);
  }
  if (thresholds.streak > 0 && longest_streak >= thresholds.streak)
    flags.push_back(McmcpFlag::Streak);
  if (thresholds.alternation > 0 && longest_alternation >= thresholds.alternation)
    flags.push_back(McmcpFlag::Alternation);

  std::vector<double> durations;
  for (auto const &r : responses)
    if (r.duration_ms)
      durations.push_back(*r.duration_ms);
  if (!durations.empty() && median(durations) < thresholds.fast_median_ms)
    flags.push_back(McmcpFlag::FastResponse);
  return flags;
}

}  // namespace corrbelief
