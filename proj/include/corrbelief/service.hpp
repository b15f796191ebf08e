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

#include "corrbelief/session.hpp"
#include "corrbelief/study.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

namespace corrbelief {

/// Files of a study export, keyed by file name.
struct ExportBundle
{
  std::string study_id;
  std::map<std::string, std::string> files;
  std::size_t sessions = 0;
  std::size_t sealed_sessions = 0;
};

/// Hosts sessions of any number of studies. Sessions are independent; events
/// of one session are applied one at a time.
///
/// With a data directory every accepted event is appended to
/// `sessions/<session_id>.jsonl` before the call returns, and a compacted
/// snapshot is written when a session seals. `recover()` rebuilds sessions
/// from those logs.
class SessionService
{
public:
  struct Options
  {
    std::optional<std::filesystem::path> data_dir;
    /// Take event times from an "at_ms" request field when present
    /// (simulations drive a virtual clock this way).
    bool trust_client_time = false;
    /// Milliseconds since the epoch; defaults to the system clock.
    std::function<std::int64_t()> clock;
  };

  SessionService();
  explicit SessionService(Options options);
  ~SessionService();

  SessionService(SessionService const &) = delete;
  SessionService &operator=(SessionService const &) = delete;

  /// Validates and registers a study. Re-registering an id is an error.
  void add_study(StudyConfig config);
  StudyConfig const &study(std::string const &study_id) const;
  std::vector<std::string> study_ids() const;

  /// Replays every session log found in the data directory. Returns the
  /// number of sessions restored.
  std::size_t recover();

  /// Body: {study_id?, participant_id, metadata?, at_ms?}. Returns the
  /// session summary and its first trial.
  Json create_session(Json const &request);
  Json session(std::string const &session_id) const;
  Json current_trial(std::string const &session_id) const;
  Json submit_prior(std::string const &session_id, std::string const &trial_id,
                    Json const &payload);
  Json acknowledge_view(std::string const &session_id, std::string const &trial_id,
                        Json const &payload);
  Json submit_posterior(std::string const &session_id, std::string const &trial_id,
                        Json const &payload);
  /// Payload: {trial_index, side: "left"|"right", duration_ms?}.
  Json submit_choice(std::string const &session_id, std::string const &chain_id,
                     Json const &payload);
  /// Payload: {answer}.
  Json submit_attention(std::string const &session_id, std::string const &item_id,
                        Json const &payload);
  Json exclusions(std::string const &session_id) const;

  /// Copy of the current state (consistent with respect to that session).
  SessionState snapshot(std::string const &session_id) const;
  std::vector<std::string> session_ids(std::string const &study_id) const;

  ExportBundle export_study(std::string const &study_id) const;

private:
  struct Entry;

  std::shared_ptr<Entry> entry(std::string const &session_id) const;
  Json apply(std::string const &session_id, Json const &event,
             std::function<Json(SessionState const &, StudyConfig const &)> const &respond);
  std::int64_t event_time(Json const &payload) const;
  void persist(SessionState const &state, Json const &event, bool fresh) const;
  void write_snapshot(SessionState const &state) const;

  Options options_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, StudyConfig> studies_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::map<std::string, std::set<std::string>> participants_;
  std::map<std::string, std::size_t> next_index_;
};

/// Tables of the export bundle, shared with the CLI.
std::string trials_csv_header();
std::string trial_csv_rows(SessionState const &state);

}  // namespace corrbelief
