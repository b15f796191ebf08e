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

#include "corrbelief/belief.hpp"
#include "corrbelief/dataset.hpp"
#include "corrbelief/mcmcp.hpp"

#include <cstddef>
#include <cstdint>
#include <string>

namespace corrbelief {

enum class AgentKind
{
  /// Answers forced choices by the Luce rule; has no update rule.
  LuceResponder,
  /// Updates to the normative posterior under its own belief as prior.
  BayesianAgent,
  /// Pools its prior and the normative posterior with weight on the prior.
  StubbornAgent
};

char const *to_string(AgentKind kind) noexcept;
AgentKind agent_kind_from_string(std::string const &text);

/// Stand-in for a human participant holding a single belief about rho.
struct SimulatedParticipant
{
  BoundedNormalBelief belief;
  AgentKind kind = AgentKind::LuceResponder;
  /// Luce temperature tau; 0 means always pick the higher-density option.
  double choice_noise = 1.0;
  /// StubbornAgent pooling weight on the prior, in [0, 1].
  double weight = 0.0;
  /// Grid resolution used for the agent's own posterior.
  std::size_t grid_count = 1001;
};

/// Probability of choosing the proposal:
/// f(p)^(1/tau) / (f(p)^(1/tau) + f(c)^(1/tau)), evaluated in log space.
double proposal_probability(SimulatedParticipant const &participant, ChoiceTrial const &trial);

Choice answer_choice(SimulatedParticipant const &participant, ChoiceTrial const &trial,
                     std::uint64_t seed);

/// Bounded normal whose truncated mean and central 95% width match the grid.
BoundedNormalBelief moment_match(RhoGrid const &grid);

/// BayesianAgent: belief becomes the moment-matched posterior.
/// StubbornAgent(w): location and scale are w * prior + (1 - w) * posterior.
/// Throws InvalidArgument for a LuceResponder.
SimulatedParticipant update_after_data(SimulatedParticipant const &participant,
                                       CorrelationDataset const &dataset);

/// Reports (belief mean, 2.5% quantile, 97.5% quantile) through the public
/// elicitation format.
ElicitationRecord elicit(SimulatedParticipant const &participant);

}  // namespace corrbelief
