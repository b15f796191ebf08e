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
#include "corrbelief/serialization.hpp"
#include "corrbelief/study.hpp"

#include "support/fixtures.hpp"

#include "doctest.h"

#include <algorithm>
#include <set>

using namespace corrbelief;
using corrbelief::testing::load_json;

namespace {

Json load(std::string const &name)
{
  return load_json(name);
}

Json minimal_fixed()
{
  return Json::parse(R"({
    "study_id": "s",
    "study_kind": "FixedDatasets",
    "treatments": ["Line"],
    "variable_pairs": [{"id": "a", "label_x": "x", "label_y": "y", "rho_pop": 0.4}],
    "rounds": [{"treatment": "Scatter", "pairs": ["a"]}]
  })");
}

}  // namespace

TEST_SUITE("serialization")
{
  TEST_CASE("elicitation wire form is flat and exact")
  {
    auto const r = fit_from_elicitation(0.35, 0.1, 0.62);
    auto const j = elicitation_to_json(r);
    CHECK(j.dump() == R"({"mu":0.35,"b_lower":0.1,"b_upper":0.62})");
    auto const back = elicitation_from_json(parse_json(j.dump()));
    CHECK(back == r);
    CHECK(back.mu == 0.35);
    CHECK(back.b_lower == 0.1);
    CHECK(back.b_upper == 0.62);
  }

  TEST_CASE("malformed elicitations are rejected")
  {
    CHECK_THROWS_AS(elicitation_from_json(Json{{"mu", 0.1}}), ParseError);
    CHECK_THROWS_AS(elicitation_from_json(Json{{"mu", "0.1"}, {"b_lower", 0}, {"b_upper", 1}}),
                    ParseError);
    CHECK_THROWS_AS(elicitation_from_json(Json{{"mu", 0.5}, {"b_lower", 0.6}, {"b_upper", 0.9}}),
                    InvalidArgument);
    CHECK_THROWS_AS(elicitation_from_json(Json::array()), ParseError);
    CHECK_THROWS_AS(parse_json("{\"mu\": "), ParseError);
  }

  TEST_CASE("datasets round trip bit for bit")
  {
    auto const d = generate_dataset(-0.4, 37, 9);
    auto const back = dataset_from_json(parse_json(dataset_to_json(d).dump()));
    CHECK(back == d);
    CHECK_THROWS_AS(dataset_from_json(Json{{"points", Json::array({Json::array({1, 2})})}}),
                    InvalidArgument);
    CHECK_THROWS_AS(dataset_from_json(Json{{"points", Json::array({1, 2, 3})}}), ParseError);
    CHECK_THROWS_AS(dataset_from_json(Json::object()), ParseError);
  }

  TEST_CASE("sampler configs round trip and fill defaults")
  {
    McmcConfig c;
    c.chains = 3;
    c.samples_per_chain = 500;
    c.burn_in = 10;
    c.proposal_width = 0.2;
    CHECK(mcmc_config_from_json(mcmc_config_to_json(c)) == c);
    CHECK(mcmc_config_from_json(Json::object()) == McmcConfig{});
    CHECK_THROWS_AS(mcmc_config_from_json(Json{{"chains", 0}}), InvalidArgument);
    CHECK_THROWS_AS(mcmc_config_from_json(Json{{"burn_in", -1}}), InvalidArgument);

    McmcpConfig p;
    p.target_trials = 40;
    p.boundary = BoundaryPolicy::ResampleThenReflect;
    auto const pj = mcmcp_config_to_json(p);
    auto const pb = mcmcp_config_from_json(pj);
    CHECK(pb.target_trials == 40);
    CHECK(pb.boundary == BoundaryPolicy::ResampleThenReflect);
    CHECK(pb.adapt_every == p.adapt_every);
    CHECK_THROWS_AS(mcmcp_config_from_json(Json{{"boundary", "wrap"}}), ParseError);
  }

  TEST_CASE("posterior results serialize their summaries")
  {
    auto const r = prior_only(BoundedNormalBelief(0.2, 0.1), McmcConfig{.samples_per_chain = 5}, 1);
    auto const j = posterior_to_json(r);
    CHECK(j["model"] == "PriorOnly");
    CHECK(j["mean"].get<double>() == r.mean);
    CHECK(j["ci"][0].get<double>() == r.ci.lower);
    CHECK(j["ci"][1].get<double>() == r.ci.upper);
    CHECK(j["grid"]["points"].size() == RhoGrid::kDefaultCount);
    CHECK(j["config"]["chains"] == 2);
    auto const lines = samples_to_json_lines(r);
    CHECK(std::count(lines.begin(), lines.end(), '\n') == 10);
  }
}

TEST_SUITE("study")
{
  TEST_CASE("shipped configs parse, validate and round trip")
  {
    for (auto const *name : {"study1.json", "study2.json", "study3.json"})
    {
      CAPTURE(name);
      auto const config = study_config_from_json(load(name));
      CHECK_NOTHROW(config.validate());
      auto const again = study_config_from_json(study_config_to_json(config));
      CHECK(study_config_to_json(again) == study_config_to_json(config));
    }
  }

  TEST_CASE("study kinds match the shipped designs")
  {
    auto const s1 = study_config_from_json(load("study1.json"));
    CHECK(s1.kind == StudyKind::ElicitationComparison);
    CHECK(s1.mcmcp.target_trials == 100);

    auto const s2 = study_config_from_json(load("study2.json"));
    CHECK(s2.kind == StudyKind::FixedDatasets);
    REQUIRE(s2.rounds.size() == 2);
    CHECK(s2.rounds[0].treatment == Treatment::Scatter);
    CHECK_FALSE(s2.rounds[1].treatment.has_value());
    std::set<double> rhos;
    for (auto const &p : s2.pairs)
      rhos.insert(*p.rho_pop);
    CHECK(rhos == std::set<double>{-0.9, -0.4, 0.0, 0.4, 0.9});

    auto const s3 = study_config_from_json(load("study3.json"));
    CHECK(s3.kind == StudyKind::CongruenceManipulated);
    CHECK(s3.sample_sizes == std::vector<std::size_t>{10, 100});
    for (auto const &p : s3.pairs)
      CHECK_FALSE(p.rho_pop.has_value());
  }

  TEST_CASE("validation errors")
  {
    auto j = minimal_fixed();
    CHECK_NOTHROW(study_config_from_json(j).validate());

    auto missing_rho = j;
    missing_rho["variable_pairs"][0].erase("rho_pop");
    CHECK_THROWS_AS(study_config_from_json(missing_rho).validate(), InvalidArgument);

    auto congruence_with_rho = j;
    congruence_with_rho["study_kind"] = "CongruenceManipulated";
    CHECK_THROWS_AS(study_config_from_json(congruence_with_rho).validate(), InvalidArgument);

    auto no_treatments = j;
    no_treatments["treatments"] = Json::array();
    CHECK_THROWS_AS(study_config_from_json(no_treatments).validate(), InvalidArgument);

    auto first_round_line = j;
    first_round_line["rounds"][0]["treatment"] = "Line";
    CHECK_THROWS_AS(study_config_from_json(first_round_line).validate(), InvalidArgument);

    auto unknown_pair = j;
    unknown_pair["rounds"][0]["pairs"] = Json::array({"zzz"});
    CHECK_THROWS(study_config_from_json(unknown_pair).validate());

    auto bad_kind = j;
    bad_kind["study_kind"] = "Study4";
    CHECK_THROWS_AS(study_config_from_json(bad_kind), ParseError);

    auto bad_treatment = j;
    bad_treatment["treatments"] = Json::array({"Bars"});
    CHECK_THROWS_AS(study_config_from_json(bad_treatment), ParseError);

    auto no_pairs = j;
    no_pairs.erase("variable_pairs");
    CHECK_THROWS_AS(study_config_from_json(no_pairs), ParseError);

    auto tiny_n = j;
    tiny_n["sample_sizes"] = Json::array({2});
    CHECK_THROWS_AS(study_config_from_json(tiny_n).validate(), InvalidArgument);

    CHECK_THROWS_AS(study_config_from_json(Json::array()), ParseError);
  }

  TEST_CASE("fixed dataset seeds depend on pair and study seed")
  {
    CHECK(fixed_dataset_seed(1, "a") == fixed_dataset_seed(1, "a"));
    CHECK(fixed_dataset_seed(1, "a") != fixed_dataset_seed(1, "b"));
    CHECK(fixed_dataset_seed(1, "a") != fixed_dataset_seed(2, "a"));
  }

  TEST_CASE("enum names round trip")
  {
    for (auto t : {Treatment::Scatter, Treatment::Line, Treatment::Cone, Treatment::HOP})
      CHECK(treatment_from_string(to_string(t)) == t);
    for (auto k : {StudyKind::ElicitationComparison, StudyKind::FixedDatasets,
                   StudyKind::CongruenceManipulated})
      CHECK(study_kind_from_string(to_string(k)) == k);
  }
}
