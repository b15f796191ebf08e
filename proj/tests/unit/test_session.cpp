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
#include "corrbelief/errors.hpp"
#include "corrbelief/random.hpp"
#include "corrbelief/session.hpp"
#include "support/fixtures.hpp"

#include "doctest.h"

#include <algorithm>
#include <map>
#include <set>

using namespace corrbelief;
using corrbelief::testing::elicitation;
using corrbelief::testing::quick_study;

namespace {

constexpr std::int64_t kMinute = 60 * 1000;

SessionState open_session(StudyConfig const &config, std::string const &participant,
                          std::size_t index = 0, std::int64_t at = 0)
{
  return start_session(config,
                       make_created_event("s-" + participant, participant, config.study_id, index,
                                          at, Json::object()));
}

// Walks every remaining trial with the same prior/posterior, spreading the
// events evenly so the last one lands at `end_ms`.
void finish(SessionState &state, StudyConfig const &config, std::int64_t end_ms,
            Json const &prior = elicitation(0.3, 0.0, 0.6),
            Json const &post = elicitation(0.4, 0.1, 0.7))
{
  std::size_t const remaining = state.trials.size() - state.cursor;
  std::int64_t const start = state.events.back().at("at_ms").get<std::int64_t>();
  std::int64_t const step = (end_ms - start) / static_cast<std::int64_t>(3 * remaining);
  std::int64_t t = start;
  while (auto const *trial = state.current())
  {
    auto const id = trial->descriptor.trial_id;
    if (trial->descriptor.kind == TrialKind::Mcmcp)
    {
      while (state.current() && state.current()->descriptor.trial_id == id)
      {
        auto const &pending = *state.current()->chain->pending();
        t += 1;
        apply_event(state, config,
                    make_choice_event(id, pending.trial_index,
                                      pending.trial_index % 3 == 0 ? Side::Left : Side::Right,
                                      1500.0, t));
      }
      continue;
    }
    apply_event(state, config, make_prior_event(id, prior, t += step));
    if (trial->descriptor.kind == TrialKind::LineCone)
      continue;
    apply_event(state, config, make_view_event(id, t += step));
    bool const last = state.cursor + 1 == state.trials.size();
    apply_event(state, config, make_posterior_event(id, post, last ? end_ms : (t += step)));
  }
}

}  // namespace

TEST_SUITE("session")
{
  TEST_CASE("plans depend on the participant and are reproducible")
  {
    auto const config = quick_study("study3.json");
    auto const a = open_session(config, "alice");
    auto const a2 = open_session(config, "alice");
    auto const b = open_session(config, "bob");
    auto order = [](SessionState const &s) {
      std::vector<std::string> ids;
      for (auto const &t : s.trials)
        ids.push_back(t.descriptor.pair_id + ":" + to_string(t.descriptor.cell->kind) + ":" +
                      std::to_string(t.descriptor.n));
      return ids;
    };
    CHECK(order(a) == order(a2));
    std::set<std::vector<std::string>> distinct;
    for (int i = 0; i < 20; ++i)
      distinct.insert(order(open_session(config, "p" + std::to_string(i))));
    CHECK(distinct.size() > 10);
    CHECK(a.seed != b.seed);
  }

  TEST_CASE("congruence plan covers every cell")
  {
    auto const config = quick_study("study3.json");
    auto const s = open_session(config, "carol");
    REQUIRE(s.trials.size() == 4);
    std::set<std::pair<Congruence, std::size_t>> cells;
    for (auto const &t : s.trials)
    {
      REQUIRE(t.descriptor.cell);
      cells.insert({t.descriptor.cell->kind, t.descriptor.cell->n});
      CHECK(t.descriptor.n == t.descriptor.cell->n);
      CHECK_FALSE(t.descriptor.rho_pop);
    }
    CHECK(cells.size() == 4);
  }

  TEST_CASE("fixed-dataset plan shows scatterplots first")
  {
    auto const config = quick_study("study2.json");
    auto const s = open_session(config, "dana", 4);
    REQUIRE(s.trials.size() == 10);
    for (std::size_t i = 0; i < 10; ++i)
    {
      auto const &d = s.trials[i].descriptor;
      CHECK(d.round == (i < 5 ? 0u : 1u));
      CHECK(d.treatment == (i < 5 ? Treatment::Scatter : s.assigned_treatment));
      CHECK(d.n == 100);
      CHECK(d.rho_pop.has_value());
    }
  }

  TEST_CASE("elicitation comparison interleaves blocks")
  {
    auto const config = quick_study("study1.json");
    auto const s = open_session(config, "erin");
    REQUIRE(s.trials.size() == 10);
    auto const first = s.trials.front().descriptor.kind;
    for (std::size_t i = 0; i < 10; ++i)
      CHECK((s.trials[i].descriptor.kind == first) == (i < 5));
    for (auto const &t : s.trials)
      if (t.descriptor.kind == TrialKind::Mcmcp)
      {
        CHECK(t.stage == TrialStage::InChain);
        CHECK(t.chain->target_trials() == 100);
      }
  }

  TEST_CASE("datasets appear only after the prior")
  {
    auto const config = quick_study("study3.json");
    Rng rng(5);
    for (int round = 0; round < 200; ++round)
    {
      auto s = open_session(config, "fuzz" + std::to_string(round));
      std::int64_t t = 0;
      for (int step = 0; step < 12; ++step)
      {
        auto const &trial = s.trials[rng.index(s.trials.size())];
        auto const id = trial.descriptor.trial_id;
        Json event;
        switch (rng.index(3))
        {
        case 0:
          event = make_prior_event(id, elicitation(0.2, -0.1, 0.5), ++t);
          break;
        case 1:
          event = make_view_event(id, ++t);
          break;
        default:
          event = make_posterior_event(id, elicitation(0.2, -0.1, 0.5), ++t);
        }
        try
        {
          apply_event(s, config, event);
        }
        catch (StateError const &)
        {
        }
        for (auto const &tr : s.trials)
        {
          CHECK(tr.dataset.has_value() == tr.prior.has_value());
          if (!tr.prior)
            CHECK_THROWS_AS(dataset_view_json(tr, config.pair(tr.descriptor.pair_id)),
                            StateError);
        }
        auto const snapshot = session_to_json(s);
        for (auto const &tr : snapshot["trials"])
          if (tr["prior"].is_null())
            CHECK(tr["dataset"].is_null());
      }
    }
  }

  TEST_CASE("ordering violations are state errors")
  {
    auto const config = quick_study("study3.json");
    auto s = open_session(config, "gil");
    auto const t0 = s.trials[0].descriptor.trial_id;
    auto const t1 = s.trials[1].descriptor.trial_id;
    CHECK_THROWS_AS(apply_event(s, config, make_view_event(t0, 1)), StateError);
    CHECK_THROWS_AS(apply_event(s, config, make_posterior_event(t0, elicitation(0, -0.2, 0.2), 1)),
                    StateError);
    CHECK_THROWS_AS(apply_event(s, config, make_prior_event(t1, elicitation(0, -0.2, 0.2), 1)),
                    StateError);
    apply_event(s, config, make_prior_event(t0, elicitation(0, -0.2, 0.2), 1));
    CHECK_THROWS_AS(apply_event(s, config, make_prior_event(t0, elicitation(0, -0.2, 0.2), 2)),
                    StateError);
    CHECK_THROWS_AS(apply_event(s, config, make_posterior_event(t0, elicitation(0, -0.2, 0.2), 2)),
                    StateError);
    CHECK_THROWS_AS(apply_event(s, config, make_view_event("t99", 2)), NotFound);
    CHECK_THROWS_AS(apply_event(s, config, Json{{"type", "teleport"}, {"trial_id", t0}}),
                    ParseError);
  }

  TEST_CASE("incongruent prior of 0.6 is shown a -0.4 dataset")
  {
    auto const config = quick_study("study3.json");
    auto s = open_session(config, "hal");
    std::int64_t t = 0;
    while (auto const *trial = s.current())
    {
      auto const id = trial->descriptor.trial_id;
      auto const kind = trial->descriptor.cell->kind;
      apply_event(s, config, make_prior_event(id, elicitation(0.6, 0.3, 0.9), ++t));
      auto const &done = s.trials[s.cursor];
      REQUIRE(done.congruence);
      CHECK(done.congruence->resolved_rho ==
            doctest::Approx(kind == Congruence::Incongruent ? -0.4 : 0.35));
      CHECK(done.dataset->rho_pop == done.congruence->resolved_rho);
      CHECK(done.dataset->n() == done.descriptor.n);
      apply_event(s, config, make_view_event(id, ++t));
      apply_event(s, config, make_posterior_event(id, elicitation(0.0, -0.3, 0.3), ++t));
    }
    CHECK(s.sealed);
  }

  TEST_CASE("fixed datasets do not depend on the prior or the participant")
  {
    auto const config = quick_study("study2.json");
    auto a = open_session(config, "ian");
    auto b = open_session(config, "jo");
    std::map<std::string, CorrelationDataset> seen;
    for (auto *s : {&a, &b})
    {
      double const mu = s == &a ? -0.8 : 0.8;
      std::int64_t t = 0;
      while (auto const *trial = s->current())
      {
        auto const id = trial->descriptor.trial_id;
        auto const pair = trial->descriptor.pair_id;
        apply_event(*s, config, make_prior_event(id, elicitation(mu, mu - 0.1, mu + 0.1), ++t));
        auto const &d = *s->trials[s->cursor].dataset;
        if (auto it = seen.find(pair); it != seen.end())
          CHECK(it->second == d);
        else
          seen.emplace(pair, d);
        apply_event(*s, config, make_view_event(id, ++t));
        apply_event(*s, config, make_posterior_event(id, elicitation(0, -0.2, 0.2), ++t));
      }
    }
    CHECK(seen.size() == 10);
  }

  TEST_CASE("cone overlay matches the uniform-prior grid interval")
  {
    auto j = corrbelief::testing::load_json("study2.json");
    j["treatments"] = Json::array({"Cone"});
    auto const config = study_config_from_json(j);
    auto s = open_session(config, "kim");
    std::int64_t t = 0;
    std::size_t checked = 0;
    while (auto const *trial = s.current())
    {
      auto const id = trial->descriptor.trial_id;
      apply_event(s, config, make_prior_event(id, elicitation(0.1, -0.2, 0.4), ++t));
      auto const &rec = s.trials[s.cursor];
      if (rec.descriptor.treatment == Treatment::Cone)
      {
        REQUIRE(rec.overlay);
        REQUIRE(rec.overlay->ci);
        auto const grid = posterior_grid(*rec.dataset, PriorSpec::uniform());
        auto const ci = grid.central_interval();
        CHECK(std::abs(rec.overlay->ci->lower - ci.lower) <= 0.03);
        CHECK(std::abs(rec.overlay->ci->upper - ci.upper) <= 0.03);
        CHECK(std::abs(rec.overlay->mean_rho - grid.mean()) <= 0.02);
        CHECK(rec.overlay->hop_draws.empty());
        auto const view = dataset_view_json(rec, config.pair(rec.descriptor.pair_id));
        CHECK(view["overlay"]["ci"][0].get<double>() == rec.overlay->ci->lower);
        ++checked;
      }
      else
      {
        CHECK_FALSE(rec.overlay);
      }
      apply_event(s, config, make_view_event(id, ++t));
      if (s.cursor + 1 == s.trials.size())
        break;
      apply_event(s, config, make_posterior_event(id, elicitation(0, -0.2, 0.2), ++t));
    }
    CHECK(checked == 5);
  }

  TEST_CASE("hop overlay carries draws inside the interval")
  {
    auto j = corrbelief::testing::load_json("study3.json");
    j["treatments"] = Json::array({"HOP"});
    j["mcmc"] = {{"samples_per_chain", 2000}};
    auto const config = study_config_from_json(j);
    auto s = open_session(config, "lee");
    auto const id = s.trials[0].descriptor.trial_id;
    apply_event(s, config, make_prior_event(id, elicitation(0.5, 0.2, 0.8), 1));
    auto const &o = *s.trials[0].overlay;
    CHECK(o.hop_draws.size() == config.hop_draws);
    CHECK(o.frame_ms == config.hop_frame_ms);
    for (double d : o.hop_draws)
    {
      CHECK(d >= o.ci->lower);
      CHECK(d <= o.ci->upper);
    }
  }

  TEST_CASE("sealing scores every update trial under every model")
  {
    auto const config = quick_study("study3.json");
    auto s = open_session(config, "max");
    finish(s, config, 10 * kMinute);
    REQUIRE(s.sealed);
    CHECK(s.current() == nullptr);
    CHECK(s.sealed_at_ms == 10 * kMinute);
    std::size_t scores = 0;
    for (auto const &t : s.trials)
    {
      REQUIRE(t.scores.size() == 3);
      for (std::size_t m = 0; m < 3; ++m)
      {
        CHECK(t.scores[m].model == kAllModels[m]);
        CHECK(t.scores[m].trial_id == s.session_id + "/" + t.descriptor.trial_id);
        CHECK(t.scores[m].kld >= 0.0);
      }
      scores += t.scores.size();
    }
    CHECK(scores == 12);
    auto const last = s.trials.back().descriptor.trial_id;
    CHECK_THROWS_AS(apply_event(s, config, make_posterior_event(last, elicitation(0, -0.1, 0.1), 1)),
                    StateError);
    CHECK_THROWS_AS(apply_event(s, config, make_attention_event("color", "blue", 1)), StateError);
  }

  TEST_CASE("replaying the event log rebuilds the same state")
  {
    for (auto const *name : {"study1.json", "study2.json", "study3.json"})
    {
      auto const config = quick_study(name);
      auto s = open_session(config, "nia");
      apply_event(s, config, make_attention_event("color", "blue", 5));
      finish(s, config, 8 * kMinute);
      auto const rebuilt = replay(config, s.events);
      CHECK(session_to_json(rebuilt) == session_to_json(s));
      CHECK(session_to_json(rebuilt).dump() == session_to_json(s).dump());
    }
  }

  TEST_CASE("a rejected event leaves the session untouched")
  {
    auto const config = quick_study("study3.json");
    auto s = open_session(config, "oz");
    auto const id = s.trials[0].descriptor.trial_id;
    apply_event(s, config, make_prior_event(id, elicitation(0.2, 0.0, 0.4), 1));
    apply_event(s, config, make_view_event(id, 2));
    auto const before = session_to_json(s).dump();
    CHECK_THROWS_AS(apply_event(s, config, make_posterior_event(id, elicitation(0.5, 0.6, 0.9), 3)),
                    InvalidArgument);
    CHECK_THROWS_AS(apply_event(s, config, make_posterior_event(id, Json{{"mu", 0.1}}, 3)),
                    ParseError);
    CHECK(session_to_json(s).dump() == before);
    CHECK(s.events.size() == 3);
  }

  TEST_CASE("treatment assignment is balanced in blocks")
  {
    auto const config = quick_study("study2.json");
    std::map<Treatment, int> counts;
    for (std::size_t i = 0; i < 3000; ++i)
      ++counts[assign_treatment(config, i)];
    REQUIRE(counts.size() == 3);
    for (auto const &[t, c] : counts)
      CHECK(c == 1000);
    for (std::size_t block = 0; block < 50; ++block)
    {
      std::set<Treatment> seen;
      for (std::size_t i = 0; i < 3; ++i)
        seen.insert(assign_treatment(config, 3 * block + i));
      CHECK(seen.size() == 3);
    }
  }

  TEST_CASE("attention answers")
  {
    auto const config = quick_study("study3.json");
    auto s = open_session(config, "pat");
    CHECK_THROWS_AS(apply_event(s, config, make_attention_event("shape", "x", 1)), NotFound);
    apply_event(s, config, make_attention_event("color", "  BLUE ", 1));
    CHECK_THROWS_AS(apply_event(s, config, make_attention_event("color", "blue", 2)), StateError);
    finish(s, config, 6 * kMinute);
    CHECK(evaluate_exclusions(s, config).empty());
  }

  TEST_CASE("exclusion rules")
  {
    auto const config = quick_study("study3.json");

    auto fast = open_session(config, "q1");
    apply_event(fast, config, make_attention_event("color", "blue", 1000));
    finish(fast, config, 4 * kMinute);
    CHECK(evaluate_exclusions(fast, config) == std::set<ExclusionFlag>{ExclusionFlag::TooFast});

    auto slow = open_session(config, "q2");
    apply_event(slow, config, make_attention_event("color", "blue", 1000));
    finish(slow, config, 6 * kMinute);
    CHECK(evaluate_exclusions(slow, config).empty());

    auto wrong = open_session(config, "q3");
    apply_event(wrong, config, make_attention_event("color", "red", 1000));
    finish(wrong, config, 6 * kMinute);
    CHECK(evaluate_exclusions(wrong, config) ==
          std::set<ExclusionFlag>{ExclusionFlag::FailedAttentionCheck});

    auto skipped = open_session(config, "q4");
    finish(skipped, config, 6 * kMinute);
    CHECK(evaluate_exclusions(skipped, config) ==
          std::set<ExclusionFlag>{ExclusionFlag::FailedAttentionCheck});

    auto open = open_session(config, "q5");
    apply_event(open, config, make_attention_event("color", "blue", 1000));
    CHECK(evaluate_exclusions(open, config) ==
          std::set<ExclusionFlag>{ExclusionFlag::IncompleteTrials});
  }

  TEST_CASE("invalid forced-choice behaviour is an exclusion")
  {
    auto const config = quick_study("study1.json");
    auto s = open_session(config, "rae");
    apply_event(s, config, make_attention_event("color", "blue", 1));
    std::int64_t t = 1;
    while (auto const *trial = s.current())
    {
      auto const id = trial->descriptor.trial_id;
      if (trial->descriptor.kind == TrialKind::LineCone)
      {
        apply_event(s, config, make_prior_event(id, elicitation(0.1, -0.2, 0.4), t += 20000));
        continue;
      }
      while (s.current() && s.current()->descriptor.trial_id == id)
        apply_event(s, config,
                    make_choice_event(id, s.current()->chain->pending()->trial_index, Side::Left,
                                      1200.0, t += 1500));
    }
    CHECK(s.sealed);
    CHECK(evaluate_exclusions(s, config) == std::set<ExclusionFlag>{ExclusionFlag::McmcpInvalid});
  }

  TEST_CASE("snapshot layout")
  {
    auto const config = quick_study("study1.json");
    auto s = open_session(config, "sam");
    auto const j = session_to_json(s);
    CHECK(j["session_id"] == "s-sam");
    CHECK(j["trials"].size() == 10);
    for (auto const &t : j["trials"])
      if (t["kind"] == "Mcmcp")
        CHECK(t["chain"]["pending"].is_object());
  }
}
