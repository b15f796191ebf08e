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
#include "corrbelief/agent.hpp"

#include "corrbelief/bayes.hpp"
#include "corrbelief/errors.hpp"
#include "corrbelief/random.hpp"

#include <algorithm>
#include <cmath>

namespace corrbelief {

namespace {

constexpr double kMaxSigma = 10.0;

// Location whose truncated mean equals `target` at the given scale; pinned to
// the support edge when the target is out of reach.
double location_for_mean(double target, double sigma)
{
  double lo = -1.0;
  double hi = 1.0;
  if (BoundedNormalBelief(lo, sigma).mean() >= target)
    return lo;
  if (BoundedNormalBelief(hi, sigma).mean() <= target)
    return hi;
  for (int i = 0; i < 100 && hi - lo > 1e-13; ++i)
  {
    double const mid = 0.5 * (lo + hi);
    if (BoundedNormalBelief(mid, sigma).mean() < target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

char const *to_string(AgentKind kind) noexcept
{
  switch (kind)
  {
  case AgentKind::LuceResponder:
    return "LuceResponder";
  case AgentKind::BayesianAgent:
    return "BayesianAgent";
  case AgentKind::StubbornAgent:
    return "StubbornAgent";
  }
  return "unknown";
}

AgentKind agent_kind_from_string(std::string const &text)
{
  for (AgentKind k : {AgentKind::LuceResponder, AgentKind::BayesianAgent, AgentKind::StubbornAgent})
    if (text == to_string(k))
      return k;
  throw ParseError("unknown agent kind '" + text + "'");
}

double proposal_probability(SimulatedParticipant const &participant, ChoiceTrial const &trial)
{
  double const lp = participant.belief.log_pdf(trial.option_proposal);
  double const lc = participant.belief.log_pdf(trial.option_current);
  if (lp == lc)
    return 0.5;
  if (participant.choice_noise <= 0.0)
    return lp > lc ? 1.0 : 0.0;
  double const diff = (lp - lc) / participant.choice_noise;
  if (std::isinf(diff))
    return diff > 0 ? 1.0 : 0.0;
  return 1.0 / (1.0 + std::exp(-diff));
}

Choice answer_choice(SimulatedParticipant const &participant, ChoiceTrial const &trial,
                     std::uint64_t seed)
{
  Rng rng(seed);
  return rng.uniform() < proposal_probability(participant, trial) ? Choice::Proposal
                                                                  : Choice::Current;
}

BoundedNormalBelief moment_match(RhoGrid const &grid)
{
  double const target_mean = std::clamp(grid.mean(), -1.0, 1.0);
  double const target_width = grid.central_interval(0.95).width();

  auto width_at = [&](double sigma) {
    BoundedNormalBelief const b(location_for_mean(target_mean, sigma), sigma);
    return b.central_interval(0.95).width();
  };

  double lo = std::log(kSigmaMin);
  double hi = std::log(kMaxSigma);
  double sigma = 0.0;
  if (width_at(kSigmaMin) >= target_width)
  {
    sigma = kSigmaMin;
  }
  else if (width_at(kMaxSigma) <= target_width)
  {
    sigma = kMaxSigma;
  }
  else
  {
    for (int i = 0; i < 80 && hi - lo > 1e-10; ++i)
    {
      double const mid = 0.5 * (lo + hi);
      if (width_at(std::exp(mid)) < target_width)
        lo = mid;
      else
        hi = mid;
    }
    sigma = std::exp(0.5 * (lo + hi));
  }
  return BoundedNormalBelief(location_for_mean(target_mean, sigma), sigma);
}

SimulatedParticipant update_after_data(SimulatedParticipant const &participant,
                                       CorrelationDataset const &dataset)
{
  if (participant.kind == AgentKind::LuceResponder)
    throw InvalidArgument("a Luce responder has no belief-update rule");

  auto const grid = posterior_grid(dataset, PriorSpec::informed(participant.belief),
                                   participant.grid_count);
  auto const posterior = moment_match(grid);

  SimulatedParticipant next = participant;
  if (participant.kind == AgentKind::BayesianAgent)
  {
    next.belief = posterior;
  }
  else
  {
    double const w = participant.weight;
    if (!(w >= 0.0 && w <= 1.0))
      throw InvalidArgument("stubborn pooling weight must lie in [0, 1]");
    auto const &prior = participant.belief;
    next.belief = BoundedNormalBelief(w * prior.mu() + (1.0 - w) * posterior.mu(),
                                      w * prior.sigma() + (1.0 - w) * posterior.sigma());
  }
  return next;
}

ElicitationRecord elicit(SimulatedParticipant const &participant)
{
  auto const ci = participant.belief.central_interval(0.95);
  double const mean = std::clamp(participant.belief.mean(), ci.lower, ci.upper);
  return fit_from_elicitation(mean, ci.lower, ci.upper);
}

}  // namespace corrbelief
