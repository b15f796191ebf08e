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
#include "corrbelief/router.hpp"
#include "corrbelief/service.hpp"
#include "support/fixtures.hpp"

#include "doctest.h"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <set>
#include <thread>

#include <unistd.h>

using namespace corrbelief;
using corrbelief::testing::elicitation;
using corrbelief::testing::quick_study;
namespace fs = std::filesystem;

namespace {

class TempDir
{
public:
  TempDir()
  {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("corrbelief-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path const &path() const { return path_; }

private:
  fs::path path_;
};

struct ManualClock
{
  std::shared_ptr<std::atomic<std::int64_t>> now = std::make_shared<std::atomic<std::int64_t>>(0);
  std::function<std::int64_t()> fn() const
  {
    return [n = now] { return n->load(); };
  }
  void advance(std::int64_t ms) const { *now += ms; }
};

std::string read_file(fs::path const &p)
{
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Completes every remaining update trial of a session through the service.
void drive(SessionService &service, std::string const &sid, ManualClock const *clock = nullptr,
           std::int64_t step_ms = 0)
{
  for (;;)
  {
    auto const summary = service.current_trial(sid);
    if (summary["trial"].is_null())
      return;
    auto const tid = summary["trial"]["trial_id"].get<std::string>();
    auto tick = [&] {
      if (clock)
        clock->advance(step_ms);
    };
    auto const stage = summary["trial"]["stage"].get<std::string>();
    if (stage == "awaiting_prior")
    {
      tick();
      service.submit_prior(sid, tid, elicitation(0.2, -0.1, 0.5));
    }
    if (stage != "awaiting_posterior")
    {
      tick();
      service.acknowledge_view(sid, tid, Json::object());
    }
    tick();
    service.submit_posterior(sid, tid, elicitation(0.3, 0.0, 0.6));
  }
}

SessionService::Options with_dir(fs::path const &dir)
{
  SessionService::Options o;
  o.data_dir = dir;
  return o;
}

}  // namespace

TEST_SUITE("service")
{
  TEST_CASE("session creation")
  {
    SessionService service;
    service.add_study(quick_study("study3.json"));
    auto const first = service.create_session(Json{{"participant_id", "p1"}});
    CHECK(first["session_id"] == "study3-000000");
    CHECK(first["status"] == "active");
    CHECK(first["total"] == 4);
    CHECK(first["index"] == 0);
    CHECK(first["attention_checks"].size() == 1);
    CHECK(first["trial"]["stage"] == "awaiting_prior");
    CHECK_FALSE(first["trial"].contains("view"));

    auto const second =
      service.create_session(Json{{"participant_id", "p2"}, {"study_id", "study3"}});
    CHECK(second["session_id"] == "study3-000001");
    CHECK_THROWS_AS(service.create_session(Json{{"participant_id", "p1"}}), StateError);
    CHECK_THROWS_AS(service.create_session(Json{{"participant_id", "p3"}, {"study_id", "nope"}}),
                    NotFound);
    CHECK_THROWS_AS(service.create_session(Json{{"participant", "p3"}}), ParseError);
    CHECK_THROWS_AS(service.create_session(Json{{"participant_id", ""}}), InvalidArgument);
    CHECK_THROWS_AS(service.session("study3-999999"), NotFound);
    CHECK_THROWS_AS(service.add_study(quick_study("study3.json")), InvalidArgument);

    service.add_study(quick_study("study2.json"));
    CHECK_THROWS_AS(service.create_session(Json{{"participant_id", "p9"}}), InvalidArgument);
    CHECK(service.study_ids() == std::vector<std::string>{"study2", "study3"});
  }

  TEST_CASE("prior submission returns the dataset view")
  {
    SessionService service;
    service.add_study(quick_study("study3.json"));
    auto const sid = service.create_session(Json{{"participant_id", "v"}})["session_id"].get<std::string>();
    auto const tid = service.current_trial(sid)["trial"]["trial_id"].get<std::string>();
    auto const r = service.submit_prior(sid, tid, elicitation(0.5, 0.2, 0.8));
    CHECK(r["accepted"] == true);
    CHECK(r["view"]["dataset"]["points"].size() == r["view"]["dataset"]["n"].get<std::size_t>());
    CHECK(r["next"]["trial"]["stage"] == "awaiting_view");
    CHECK(r["next"]["trial"]["view"] == r["view"]);
    CHECK_THROWS_AS(service.submit_posterior(sid, tid, elicitation(0.5, 0.2, 0.8)), StateError);
  }

  TEST_CASE("server clock drives exclusion timing")
  {
    ManualClock clock;
    SessionService::Options options;
    options.clock = clock.fn();
    SessionService service(options);
    service.add_study(quick_study("study3.json"));

    auto const fast =
      service.create_session(Json{{"participant_id", "fast"}, {"at_ms", 10'000'000}})["session_id"]
        .get<std::string>();
    service.submit_attention(fast, "color", Json{{"answer", "blue"}, {"at_ms", 99}});
    drive(service, fast, &clock, 20'000);  // 12 steps of 20 s = 4 minutes
    auto const f = service.exclusions(fast);
    CHECK(f["sealed"] == true);
    CHECK(f["flags"] == Json::array({"TooFast"}));

    auto const slow =
      service.create_session(Json{{"participant_id", "slow"}})["session_id"].get<std::string>();
    service.submit_attention(slow, "color", Json{{"answer", "blue"}});
    drive(service, slow, &clock, 30'000);  // 6 minutes
    CHECK(service.exclusions(slow)["flags"].empty());
  }

  TEST_CASE("client time is honoured only when trusted")
  {
    SessionService::Options options;
    options.trust_client_time = true;
    options.clock = [] { return std::int64_t{5}; };
    SessionService service(options);
    service.add_study(quick_study("study3.json"));
    auto const sid = service.create_session(Json{{"participant_id", "t"}, {"at_ms", 1234}})["session_id"]
                       .get<std::string>();
    CHECK(service.snapshot(sid).created_at_ms == 1234);
    auto const other =
      service.create_session(Json{{"participant_id", "u"}})["session_id"].get<std::string>();
    CHECK(service.snapshot(other).created_at_ms == 5);
  }

  TEST_CASE("event logs survive a restart")
  {
    TempDir dir;
    std::string sid;
    std::string before;
    {
      SessionService service(with_dir(dir.path()));
      service.add_study(quick_study("study3.json"));
      sid = service.create_session(Json{{"participant_id", "r"}})["session_id"].get<std::string>();
      auto const tid = service.current_trial(sid)["trial"]["trial_id"].get<std::string>();
      service.submit_prior(sid, tid, elicitation(-0.3, -0.6, 0.0));
      service.acknowledge_view(sid, tid, Json::object());
      before = service.session(sid).dump();
    }
    auto const log = dir.path() / "sessions" / (sid + ".jsonl");
    REQUIRE(fs::exists(log));
    auto const text = read_file(log);
    CHECK(std::count(text.begin(), text.end(), '\n') == 3);

    SessionService restored(with_dir(dir.path()));
    restored.add_study(quick_study("study3.json"));
    CHECK(restored.recover() == 1);
    CHECK(restored.session(sid).dump() == before);
    CHECK_THROWS_AS(restored.create_session(Json{{"participant_id", "r"}}), StateError);
    CHECK(restored.create_session(Json{{"participant_id", "s"}})["session_id"] == "study3-000001");

    drive(restored, sid);
    CHECK(restored.snapshot(sid).sealed);
    auto const snapshot = dir.path() / "sessions" / (sid + ".snapshot.json");
    REQUIRE(fs::exists(snapshot));
    CHECK(parse_json(read_file(snapshot)) == restored.session(sid));
  }

  TEST_CASE("a torn final line is dropped and later appends stay readable")
  {
    TempDir dir;
    std::string sid;
    {
      SessionService service(with_dir(dir.path()));
      service.add_study(quick_study("study3.json"));
      sid = service.create_session(Json{{"participant_id", "torn"}})["session_id"].get<std::string>();
    }
    auto const log = dir.path() / "sessions" / (sid + ".jsonl");
    {
      std::ofstream out(log, std::ios::app | std::ios::binary);
      out << R"({"type":"prior_submitted","trial_id":"t0","mu":0.)";
    }
    {
      SessionService service(with_dir(dir.path()));
      service.add_study(quick_study("study3.json"));
      CHECK(service.recover() == 1);
      CHECK(service.snapshot(sid).events.size() == 1);
      auto const tid = service.current_trial(sid)["trial"]["trial_id"].get<std::string>();
      service.submit_prior(sid, tid, elicitation(0.1, -0.2, 0.4));
    }
    SessionService again(with_dir(dir.path()));
    again.add_study(quick_study("study3.json"));
    CHECK(again.recover() == 1);
    CHECK(again.snapshot(sid).events.size() == 2);
  }

  TEST_CASE("corruption before the last line is an error")
  {
    TempDir dir;
    fs::create_directories(dir.path() / "sessions");
    {
      std::ofstream out(dir.path() / "sessions" / "x.jsonl");
      out << "{broken\n{\"type\":\"view_ack\"}\n";
    }
    SessionService service(with_dir(dir.path()));
    service.add_study(quick_study("study3.json"));
    CHECK_THROWS_AS(service.recover(), ParseError);
    SessionService none;
    CHECK_THROWS_AS(none.recover(), StateError);
  }

  TEST_CASE("a failed log write rolls the session back")
  {
    TempDir dir;
    SessionService service(with_dir(dir.path()));
    service.add_study(quick_study("study3.json"));
    auto const sid = service.create_session(Json{{"participant_id", "io"}})["session_id"].get<std::string>();
    auto const tid = service.current_trial(sid)["trial"]["trial_id"].get<std::string>();
    auto const before = service.session(sid).dump();
    auto const log = dir.path() / "sessions" / (sid + ".jsonl");
    fs::remove(log);
    fs::create_directory(log);
    CHECK_THROWS_AS(service.submit_prior(sid, tid, elicitation(0.1, -0.2, 0.4)), IoError);
    CHECK(service.session(sid).dump() == before);
  }

  TEST_CASE("concurrent sessions stay independent")
  {
    TempDir dir;
    SessionService service(with_dir(dir.path()));
    service.add_study(quick_study("study3.json", 500));
    constexpr int kThreads = 8;
    constexpr int kPerThread = 4;
    std::atomic<int> failures{0};
    {
      std::vector<std::jthread> workers;
      for (int w = 0; w < kThreads; ++w)
        workers.emplace_back([&, w] {
          try
          {
            for (int i = 0; i < kPerThread; ++i)
            {
              auto const sid =
                service.create_session(Json{{"participant_id", "c" + std::to_string(w * 100 + i)}})
                  ["session_id"]
                    .get<std::string>();
              service.submit_attention(sid, "color", Json{{"answer", "blue"}});
              drive(service, sid);
              service.export_study("study3");
            }
          }
          catch (...)
          {
            ++failures;
          }
        });
    }
    CHECK(failures == 0);
    auto const ids = service.session_ids("study3");
    CHECK(ids.size() == kThreads * kPerThread);
    std::set<std::size_t> indices;
    for (auto const &id : ids)
    {
      auto const s = service.snapshot(id);
      CHECK(s.sealed);
      indices.insert(s.assignment_index);
    }
    CHECK(indices.size() == ids.size());
    CHECK(*indices.rbegin() == ids.size() - 1);

    SessionService restored(with_dir(dir.path()));
    restored.add_study(quick_study("study3.json", 500));
    CHECK(restored.recover() == ids.size());
    for (auto const &id : ids)
      CHECK(restored.session(id) == service.session(id));
  }

  TEST_CASE("export bundle contents")
  {
    SessionService service;
    service.add_study(quick_study("study3.json"));
    for (auto const *p : {"e1", "e2", "e3"})
    {
      auto const sid = service.create_session(Json{{"participant_id", p}})["session_id"].get<std::string>();
      if (std::string(p) != "e3")
        drive(service, sid);
    }
    auto const bundle = service.export_study("study3");
    CHECK(bundle.sessions == 3);
    CHECK(bundle.sealed_sessions == 2);
    for (auto const *name :
         {"trials.csv", "scores.csv", "sessions.jsonl", "chains.jsonl", "exclusions.csv", "bundle.json"})
      CHECK(bundle.files.count(name) == 1);
    auto const &scores = bundle.files.at("scores.csv");
    CHECK(scores.rfind("trial_id,model,mae,kld\n", 0) == 0);
    CHECK(std::count(scores.begin(), scores.end(), '\n') == 1 + 2 * 4 * 3);
    auto const &trials = bundle.files.at("trials.csv");
    CHECK(trials.rfind(trials_csv_header(), 0) == 0);
    CHECK(std::count(trials.begin(), trials.end(), '\n') == 1 + 3 * 4);
    auto const meta = parse_json(bundle.files.at("bundle.json"));
    CHECK(meta["kld_direction"] == "elicited||predicted");
    CHECK(meta["sealed_sessions"] == 2);
    auto const &excl = bundle.files.at("exclusions.csv");
    CHECK(excl.find("study3-000002,e3,false,FailedAttentionCheck;IncompleteTrials") !=
          std::string::npos);
    CHECK_THROWS_AS(service.export_study("nope"), NotFound);
  }
}

TEST_SUITE("router")
{
  TEST_CASE("routes and status codes")
  {
    SessionService service;
    service.add_study(quick_study("study3.json"));
    ApiRouter const router(service);

    auto created = router.handle("POST", "/sessions", R"({"participant_id":"h1"})");
    CHECK(created.status == 201);
    auto const sid = parse_json(created.body)["session_id"].get<std::string>();
    auto const tid = parse_json(created.body)["trial"]["trial_id"].get<std::string>();

    CHECK(router.handle("GET", "/sessions/" + sid, "").status == 200);
    CHECK(router.handle("GET", "/sessions/" + sid + "/current-trial?x=1", "").status == 200);
    CHECK(router.handle("POST", "/sessions", R"({"participant_id":"h1"})").status == 409);
    CHECK(router.handle("POST", "/sessions", "not json").status == 400);
    CHECK(router.handle("POST", "/sessions", "[1]").status == 400);
    CHECK(router.handle("GET", "/sessions/nope", "").status == 404);
    CHECK(router.handle("GET", "/teapot", "").status == 404);
    CHECK(router.handle("DELETE", "/sessions/" + sid, "").status == 404);

    auto const base = "/sessions/" + sid + "/trials/" + tid;
    auto early = router.handle("POST", base + "/posterior", R"({"mu":0,"b_lower":-0.1,"b_upper":0.1})");
    CHECK(early.status == 409);
    auto const err = parse_json(early.body);
    CHECK(err["error"]["code"] == "state_error");
    CHECK(err["error"]["message"].get<std::string>().size() > 0);

    CHECK(router.handle("POST", base + "/prior", R"({"mu":0.5,"b_lower":0.6,"b_upper":0.9})").status ==
          400);
    auto const prior = router.handle("POST", base + "/prior", R"({"mu":0.5,"b_lower":0.2,"b_upper":0.8})");
    CHECK(prior.status == 200);
    CHECK(parse_json(prior.body)["view"]["dataset"]["n"].get<int>() > 0);
    CHECK(router.handle("POST", base + "/view-ack", "").status == 200);
    CHECK(router.handle("POST", base + "/posterior", R"({"mu":0.4,"b_lower":0.1,"b_upper":0.7})").status ==
          200);
    CHECK(router.handle("POST", "/sessions/" + sid + "/attention/color", R"({"answer":"blue"})").status ==
          200);
    CHECK(router.handle("POST", "/sessions/" + sid + "/attention/color", R"({"answer":"blue"})").status ==
          409);
    CHECK(router.handle("POST", "/sessions/" + sid + "/attention/shape", R"({"answer":"x"})").status ==
          404);
    auto const excl = parse_json(router.handle("GET", "/sessions/" + sid + "/exclusions", "").body);
    CHECK(excl["flags"] == Json::array({"IncompleteTrials"}));

    CHECK(parse_json(router.handle("GET", "/studies", "").body)["studies"] == Json::array({"study3"}));
    CHECK(parse_json(router.handle("GET", "/studies/study3", "").body)["study_kind"] ==
          "CongruenceManipulated");
    auto const exported = parse_json(router.handle("GET", "/studies/study3/export", "").body);
    CHECK(exported["sessions"] == 1);
    CHECK(exported["files"].contains("trials.csv"));
  }

  TEST_CASE("forced-choice route")
  {
    SessionService service;
    service.add_study(quick_study("study1.json"));
    ApiRouter const router(service);
    auto const created = parse_json(router.handle("POST", "/sessions", R"({"participant_id":"m"})").body);
    auto const sid = created["session_id"].get<std::string>();
    auto trial = created["trial"];
    if (trial["kind"] == "LineCone")
    {
      for (int i = 0; i < 5; ++i)
      {
        auto const tid = trial["trial_id"].get<std::string>();
        auto const r = router.handle("POST", "/sessions/" + sid + "/trials/" + tid + "/prior",
                                     R"({"mu":0.1,"b_lower":-0.2,"b_upper":0.4})");
        REQUIRE(r.status == 200);
        trial = parse_json(r.body)["next"]["trial"];
      }
    }
    REQUIRE(trial["kind"] == "Mcmcp");
    auto const chain = trial["trial_id"].get<std::string>();
    auto const url = "/sessions/" + sid + "/mcmcp/" + chain + "/choice";
    CHECK(router.handle("POST", url, R"({"trial_index":3,"side":"left"})").status == 409);
    CHECK(router.handle("POST", url, R"({"trial_index":0,"side":"up"})").status == 400);
    CHECK(router.handle("POST", url, R"({"trial_index":-1,"side":"left"})").status == 400);
    auto const r = parse_json(
      router.handle("POST", url, R"({"trial_index":0,"side":"right","duration_ms":800})").body);
    CHECK(r["chain_complete"] == false);
    CHECK(r["pending"]["trial_index"] == 1);
    CHECK(r["next"]["trial"]["chain"]["completed"] == 1);
    CHECK(std::abs(r["pending"]["left_rho"].get<double>()) <= 1.0);
  }
}
