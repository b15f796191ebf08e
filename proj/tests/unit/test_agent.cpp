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

#include "doctest.h"

#include <cmath>

using namespace corrbelief;

namespace {

SimulatedParticipant agent(AgentKind kind, double mu, double sigma, double weight = 0.0)
{
  return SimulatedParticipant{BoundedNormalBelief(mu, sigma), kind, 1.0, weight};
}

CorrelationDataset near_r(double rho, std::size_t n, double tolerance = 0.01)
{
  for (std::uint64_t seed = 0;; ++seed)
  {
    auto d = generate_dataset(rho, n, seed);
    if (std::abs(d.r_sample - rho) < tolerance)
      return d;
  }
}

}  // namespace

TEST_SUITE("agent")
{
  TEST_CASE("Luce probability")
  {
    auto p = agent(AgentKind::LuceResponder, 0.0, 0.3);
    CHECK(proposal_probability(p, {0.2, -0.2, 1, PresentationOrder::CurrentLeft}) == 0.5);
    ChoiceTrial const t{0.1, 0.5, 1, PresentationOrder::CurrentLeft};
    double const fp = p.belief.pdf(0.5);
    double const fc = p.belief.pdf(0.1);
    CHECK(proposal_probability(p, t) == doctest::Approx(fp / (fp + fc)).epsilon(1e-12));
    p.choice_noise = 2.0;
    CHECK(proposal_probability(p, t) ==
          doctest::Approx(std::sqrt(fp) / (std::sqrt(fp) + std::sqrt(fc))).epsilon(1e-12));
    p.choice_noise = 0.0;
    CHECK(proposal_probability(p, t) == 0.0);
    CHECK(proposal_probability(p, {0.5, 0.1, 1, PresentationOrder::CurrentLeft}) == 1.0);
    for (std::uint64_t s = 0; s < 50; ++s)
      CHECK(answer_choice(p, t, s) == Choice::Current);
  }

  TEST_CASE("choice frequencies follow the probability")
  {
    auto const p = agent(AgentKind::LuceResponder, 0.3, 0.2);
    ChoiceTrial const t{0.0, 0.35, 4, PresentationOrder::CurrentRight};
    double const expected = proposal_probability(p, t);
    int hits = 0;
    for (std::uint64_t s = 0; s < 20000; ++s)
      hits += answer_choice(p, t, derive_seed(3, s)) == Choice::Proposal ? 1 : 0;
    CHECK(hits / 20000.0 == doctest::Approx(expected).epsilon(0.02));
  }

  TEST_CASE("moment matching recovers a truncated normal")
  {
    for (auto const &b : {BoundedNormalBelief(0.2, 0.15), BoundedNormalBelief(-0.7, 0.3),
                          BoundedNormalBelief(0.9, 0.1)})
    {
      auto const m = moment_match(RhoGrid::from_belief(b, 2001));
      CHECK(m.mu() == doctest::Approx(b.mu()).epsilon(0.01).scale(1.0));
      CHECK(m.sigma() == doctest::Approx(b.sigma()).epsilon(0.02));
    }
  }

  TEST_CASE("a flat-prior Bayesian agent tracks a strong sample")
  {
    auto const d = near_r(0.9, 100);
    auto const next = update_after_data(agent(AgentKind::BayesianAgent, 0.0, 10.0), d);
    CHECK(std::abs(next.belief.mean() - 0.9) <= 0.03);
    CHECK(next.kind == AgentKind::BayesianAgent);
  }

  TEST_CASE("Bayesian update matches the informed posterior summary")
  {
    auto const d = generate_dataset(-0.4, 10, 4);
    auto const p = agent(AgentKind::BayesianAgent, 0.5, 0.2);
    auto const next = update_after_data(p, d);
    auto const g = posterior_grid(d, PriorSpec::informed(p.belief), 1001);
    CHECK(next.belief.mean() == doctest::Approx(g.mean()).epsilon(1e-3).scale(1.0));
    CHECK(next.belief.central_interval().width() ==
          doctest::Approx(g.central_interval().width()).epsilon(1e-3));
  }

  TEST_CASE("stubborn pooling endpoints")
  {
    auto const d = generate_dataset(-0.6, 50, 2);
    auto const fixed = update_after_data(agent(AgentKind::StubbornAgent, 0.4, 0.15, 1.0), d);
    CHECK(fixed.belief == BoundedNormalBelief(0.4, 0.15));
    auto const open = update_after_data(agent(AgentKind::StubbornAgent, 0.4, 0.15, 0.0), d);
    auto const bayes = update_after_data(agent(AgentKind::BayesianAgent, 0.4, 0.15), d);
    CHECK(open.belief.mu() == doctest::Approx(bayes.belief.mu()).epsilon(1e-9));
    CHECK(open.belief.sigma() == doctest::Approx(bayes.belief.sigma()).epsilon(1e-9));
  }

  TEST_CASE("stubbornness monotonically pulls toward the prior")
  {
    auto const d = generate_dataset(-0.5, 100, 6);
    double previous = INFINITY;
    for (double w : {0.0, 0.25, 0.5, 0.75, 1.0})
    {
      auto const next = update_after_data(agent(AgentKind::StubbornAgent, 0.5, 0.2, w), d);
      double const gap = std::abs(next.belief.mu() - 0.5);
      CHECK(gap < previous + 1e-12);
      previous = gap;
    }
    CHECK(previous == doctest::Approx(0.0).scale(1.0));
  }

  TEST_CASE("update preconditions")
  {
    auto const d = generate_dataset(0.0, 20, 1);
    CHECK_THROWS_AS(update_after_data(agent(AgentKind::LuceResponder, 0.0, 0.2), d),
                    InvalidArgument);
    CHECK_THROWS_AS(update_after_data(agent(AgentKind::StubbornAgent, 0.0, 0.2, 1.5), d),
                    InvalidArgument);
  }

  TEST_CASE("elicitation reports the belief's mean and interval")
  {
    auto const r = elicit(agent(AgentKind::BayesianAgent, 0.0, 0.2));
    CHECK(r.mu == doctest::Approx(0.0).scale(1.0));
    CHECK(r.b_lower == doctest::Approx(-0.392).epsilon(1e-3).scale(1.0));
    CHECK(r.b_upper == doctest::Approx(0.392).epsilon(1e-3).scale(1.0));

    auto const tight = elicit(agent(AgentKind::BayesianAgent, 0.3, kSigmaMin));
    CHECK(tight.b_lower < tight.b_upper);
    CHECK(tight.fitted.sigma() >= kSigmaMin);
  }

  TEST_CASE("elicitation round trip recovers the parameters")
  {
    for (double mu : {-0.5, 0.0, 0.4})
      for (double sigma : {0.05, 0.1, 0.2})
      {
        auto const r = elicit(agent(AgentKind::BayesianAgent, mu, sigma));
        CHECK(std::abs(r.fitted.mu() - mu) <= 0.02);
        CHECK(std::abs(r.fitted.sigma() - sigma) <= 0.02);
      }
  }

  TEST_CASE("agent kind names")
  {
    for (auto k : {AgentKind::LuceResponder, AgentKind::BayesianAgent, AgentKind::StubbornAgent})
      CHECK(agent_kind_from_string(to_string(k)) == k);
    CHECK_THROWS_AS(agent_kind_from_string("Human"), ParseError);
  }
}
