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
#include "corrbelief/service.hpp"

#include "corrbelief/errors.hpp"
#include "corrbelief/format.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace corrbelief {

namespace fs = std::filesystem;

struct SessionService::Entry
{
  std::mutex mutex;
  SessionState state;
  StudyConfig const *config = nullptr;
};

namespace {

std::int64_t system_now_ms()
{
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

std::string padded(std::size_t value, int width)
{
  std::string digits = std::to_string(value);
  if (digits.size() < static_cast<std::size_t>(width))
    digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
  return digits;
}

Json pair_json(VariablePair const &pair)
{
  return Json{{"id", pair.id}, {"label_x", pair.label_x}, {"label_y", pair.label_y}};
}

Json trial_summary(SessionState const &state, StudyConfig const &config)
{
  Json pending_checks = Json::array();
  for (auto const &item : config.attention_checks)
    if (!state.attention_answers.count(item.id))
      pending_checks.push_back({{"id", item.id}, {"question", item.question}});

  Json out{{"session_id", state.session_id},
           {"status", state.sealed ? "sealed" : "active"},
           {"treatment", to_string(state.assigned_treatment)},
           {"index", state.cursor},
           {"total", state.trials.size()},
           {"attention_checks", std::move(pending_checks)}};

  TrialRecord const *trial = state.current();
  if (!trial)
  {
    out["trial"] = nullptr;
    return out;
  }
  auto const &d = trial->descriptor;
  auto const &pair = config.pair(d.pair_id);
  Json t{{"trial_id", d.trial_id},
         {"kind", to_string(d.kind)},
         {"pair", pair_json(pair)},
         {"round", d.round},
         {"treatment", to_string(d.treatment)},
         {"stage", to_string(trial->stage)}};
  if (trial->stage == TrialStage::AwaitingView || trial->stage == TrialStage::AwaitingPosterior)
    t["view"] = dataset_view_json(*trial, pair);
  if (trial->chain)
  {
    auto const &chain = *trial->chain;
    t["chain"] = {{"chain_id", d.trial_id},
                  {"completed", chain.responses().size()},
                  {"target_trials", chain.target_trials()},
                  {"pending", chain.pending() ? choice_trial_to_json(*chain.pending())
                                              : Json(nullptr)}};
  }
  out["trial"] = std::move(t);
  return out;
}

std::string optional_field(std::optional<double> const &value)
{
  return value ? format_double(*value) : std::string();
}

void write_file_atomically(fs::path const &path, std::string const &content)
{
  fs::path const tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    out.flush();
    if (!out)
      throw IoError("cannot write " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec)
    throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

std::string flags_field(std::set<ExclusionFlag> const &flags)
{
  std::string out;
  for (auto flag : flags)
  {
    if (!out.empty())
      out += ';';
    out += to_string(flag);
  }
  return out;
}

}  // namespace

std::string trials_csv_header()
{
  return "session_id,participant_id,assigned_treatment,trial_id,kind,pair_id,round,treatment,"
         "congruence,n,rho_pop,r_sample,prior_mu,prior_b_lower,prior_b_upper,post_mu,"
         "post_b_lower,post_b_upper,mcmcp_mean,mcmcp_ci_lower,mcmcp_ci_upper,view_ms,"
         "mae_prior_only,kld_prior_only,mae_informed,kld_informed,mae_uniform,kld_uniform\n";
}

std::string trial_csv_rows(SessionState const &state)
{
  std::ostringstream out;
  for (auto const &t : state.trials)
  {
    auto const &d = t.descriptor;
    std::vector<std::string> row{csv_field(state.session_id),
                                 csv_field(state.participant_id),
                                 to_string(state.assigned_treatment),
                                 d.trial_id,
                                 to_string(d.kind),
                                 csv_field(d.pair_id),
                                 std::to_string(d.round),
                                 to_string(d.treatment),
                                 d.cell ? to_string(d.cell->kind) : "",
                                 d.kind == TrialKind::Update ? std::to_string(d.n) : ""};
    std::optional<double> rho = d.rho_pop;
    if (t.congruence)
      rho = t.congruence->resolved_rho;
    row.push_back(optional_field(rho));
    row.push_back(t.dataset ? format_double(t.dataset->r_sample) : "");
    for (auto const *record : {&t.prior, &t.posterior})
    {
      row.push_back(*record ? format_double((*record)->mu) : "");
      row.push_back(*record ? format_double((*record)->b_lower) : "");
      row.push_back(*record ? format_double((*record)->b_upper) : "");
    }
    if (t.chain && t.chain->states().size() >= 2)
    {
      auto const s = t.chain->summarize();
      row.insert(row.end(), {format_double(s.mean), format_double(s.ci_lower),
                             format_double(s.ci_upper)});
    }
    else
    {
      row.insert(row.end(), 3, "");
    }
    row.push_back(t.view_at_ms && t.posterior_at_ms
                    ? std::to_string(*t.posterior_at_ms - *t.view_at_ms)
                    : "");
    for (auto model : kAllModels)
    {
      auto it = std::find_if(t.scores.begin(), t.scores.end(),
                             [&](FitScore const &s) { return s.model == model; });
      row.push_back(it != t.scores.end() ? format_double(it->mae) : "");
      row.push_back(it != t.scores.end() ? format_double(it->kld) : "");
    }
    for (std::size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << row[i];
    out << '\n';
  }
  return out.str();
}

SessionService::SessionService()
  : SessionService(Options{})
{}

SessionService::SessionService(Options options)
  : options_(std::move(options))
{
  if (!options_.clock)
    options_.clock = system_now_ms;
  if (options_.data_dir)
  {
    std::error_code ec;
    fs::create_directories(*options_.data_dir / "sessions", ec);
    if (ec)
      throw IoError("cannot create data directory " + options_.data_dir->string() + ": " +
                    ec.message());
  }
}

SessionService::~SessionService() = default;

void SessionService::add_study(StudyConfig config)
{
  config.validate();
  std::unique_lock lock(mutex_);
  if (studies_.count(config.study_id))
    throw InvalidArgument("study '" + config.study_id + "' is already registered");
  auto id = config.study_id;
  studies_.emplace(std::move(id), std::move(config));
}

StudyConfig const &SessionService::study(std::string const &study_id) const
{
  std::shared_lock lock(mutex_);
  auto it = studies_.find(study_id);
  if (it == studies_.end())
    throw NotFound("no study '" + study_id + "'");
  return it->second;
}

std::vector<std::string> SessionService::study_ids() const
{
  std::shared_lock lock(mutex_);
  std::vector<std::string> ids;
  for (auto const &[id, config] : studies_)
    ids.push_back(id);
  return ids;
}

std::int64_t SessionService::event_time(Json const &payload) const
{
  if (options_.trust_client_time && payload.is_object() && payload.contains("at_ms"))
    return require_integer(payload, "at_ms");
  return options_.clock();
}

void SessionService::persist(SessionState const &state, Json const &event, bool fresh) const
{
  if (!options_.data_dir)
    return;
  fs::path const path = *options_.data_dir / "sessions" / (state.session_id + ".jsonl");
  std::ofstream out(path, std::ios::binary | (fresh ? std::ios::trunc : std::ios::app));
  out << event.dump() << '\n';
  out.flush();
  if (!out)
    throw IoError("cannot append to " + path.string());
}

void SessionService::write_snapshot(SessionState const &state) const
{
  if (!options_.data_dir)
    return;
  write_file_atomically(*options_.data_dir / "sessions" / (state.session_id + ".snapshot.json"),
                        session_to_json(state).dump(2) + "\n");
}

std::size_t SessionService::recover()
{
  if (!options_.data_dir)
    throw StateError("recovery needs a data directory");
  std::vector<fs::path> logs;
  for (auto const &item : fs::directory_iterator(*options_.data_dir / "sessions"))
    if (item.path().extension() == ".jsonl")
      logs.push_back(item.path());
  std::sort(logs.begin(), logs.end());

  std::unique_lock lock(mutex_);
  std::size_t restored = 0;
  for (auto const &path : logs)
  {
    std::ifstream in(path, std::ios::binary);
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);)
      if (!line.empty())
        lines.push_back(std::move(line));
    in.close();
    std::vector<Json> events;
    for (std::size_t i = 0; i < lines.size(); ++i)
    {
      try
      {
        events.push_back(parse_json(lines[i]));
      }
      catch (ParseError const &)
      {
        if (i + 1 < lines.size())
          throw ParseError("corrupt event log " + path.string() + " at line " +
                           std::to_string(i + 1));
        // A torn final line is what an interrupted append leaves behind. Cut
        // it off so later appends start on a fresh line.
        lines.pop_back();
        std::string kept;
        for (auto const &line : lines)
          kept += line + '\n';
        write_file_atomically(path, kept);
        break;
      }
    }
    if (events.empty())
      continue;
    auto const study_id = require_string(events.front(), "study_id");
    auto study = studies_.find(study_id);
    if (study == studies_.end())
      throw NotFound("log " + path.string() + " belongs to unregistered study '" + study_id +
                     "'");
    auto entry = std::make_shared<Entry>();
    entry->config = &study->second;
    entry->state = replay(study->second, events);
    auto const &state = entry->state;
    if (sessions_.count(state.session_id))
      continue;
    participants_[study_id].insert(state.participant_id);
    auto &next = next_index_[study_id];
    next = std::max(next, state.assignment_index + 1);
    if (state.sealed)
      write_snapshot(state);
    sessions_.emplace(state.session_id, std::move(entry));
    ++restored;
  }
  return restored;
}

std::shared_ptr<SessionService::Entry> SessionService::entry(std::string const &session_id) const
{
  std::shared_lock lock(mutex_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end())
    throw NotFound("no session '" + session_id + "'");
  return it->second;
}

Json SessionService::create_session(Json const &request)
{
  if (!request.is_object())
    throw ParseError("request body must be a JSON object");
  auto const participant = require_string(request, "participant_id");
  if (participant.empty())
    throw InvalidArgument("participant_id must not be empty");
  Json metadata = request.contains("metadata") ? request.at("metadata") : Json::object();
  if (!metadata.is_object())
    throw ParseError("metadata must be an object");
  std::int64_t const at = event_time(request);

  std::unique_lock lock(mutex_);
  StudyConfig const *config = nullptr;
  if (request.contains("study_id"))
  {
    auto const id = require_string(request, "study_id");
    auto it = studies_.find(id);
    if (it == studies_.end())
      throw NotFound("no study '" + id + "'");
    config = &it->second;
  }
  else if (studies_.size() == 1)
  {
    config = &studies_.begin()->second;
  }
  else
  {
    throw InvalidArgument("study_id is required when several studies are hosted");
  }

  auto &participants = participants_[config->study_id];
  if (participants.count(participant))
    throw StateError("participant '" + participant + "' already has a session in study '" +
                     config->study_id + "'");
  std::size_t const index = next_index_[config->study_id];
  std::string const session_id = config->study_id + "-" + padded(index, 6);
  Json const created =
    make_created_event(session_id, participant, config->study_id, index, at, std::move(metadata));

  auto fresh = std::make_shared<Entry>();
  fresh->config = config;
  fresh->state = start_session(*config, created);
  persist(fresh->state, created, true);

  next_index_[config->study_id] = index + 1;
  participants.insert(participant);
  sessions_.emplace(session_id, fresh);
  return trial_summary(fresh->state, *config);
}

Json SessionService::apply(
  std::string const &session_id, Json const &event,
  std::function<Json(SessionState const &, StudyConfig const &)> const &respond)
{
  auto e = entry(session_id);
  std::lock_guard lock(e->mutex);
  auto &state = e->state;
  bool const was_sealed = state.sealed;
  apply_event(state, *e->config, event);
  try
  {
    persist(state, event, false);
  }
  catch (...)
  {
    std::vector<Json> earlier(state.events.begin(), state.events.end() - 1);
    state = replay(*e->config, earlier);
    throw;
  }
  if (state.sealed && !was_sealed)
    write_snapshot(state);
  return respond(state, *e->config);
}

Json SessionService::session(std::string const &session_id) const
{
  auto e = entry(session_id);
  std::lock_guard lock(e->mutex);
  return session_to_json(e->state);
}

SessionState SessionService::snapshot(std::string const &session_id) const
{
  auto e = entry(session_id);
  std::lock_guard lock(e->mutex);
  return e->state;
}

std::vector<std::string> SessionService::session_ids(std::string const &study_id) const
{
  std::shared_lock lock(mutex_);
  if (!studies_.count(study_id))
    throw NotFound("no study '" + study_id + "'");
  std::vector<std::string> ids;
  for (auto const &[id, e] : sessions_)
    if (e->config->study_id == study_id)
      ids.push_back(id);
  return ids;
}

Json SessionService::current_trial(std::string const &session_id) const
{
  auto e = entry(session_id);
  std::lock_guard lock(e->mutex);
  return trial_summary(e->state, *e->config);
}

Json SessionService::submit_prior(std::string const &session_id, std::string const &trial_id,
                                  Json const &payload)
{
  auto const event = make_prior_event(trial_id, payload, event_time(payload));
  return apply(session_id, event, [&](SessionState const &state, StudyConfig const &config) {
    auto const &trial = state.trial(trial_id);
    Json out{{"accepted", true}};
    if (trial.dataset)
      out["view"] = dataset_view_json(trial, config.pair(trial.descriptor.pair_id));
    out["next"] = trial_summary(state, config);
    return out;
  });
}

Json SessionService::acknowledge_view(std::string const &session_id, std::string const &trial_id,
                                      Json const &payload)
{
  auto const event = make_view_event(trial_id, event_time(payload));
  return apply(session_id, event, [](SessionState const &state, StudyConfig const &config) {
    return Json{{"accepted", true}, {"next", trial_summary(state, config)}};
  });
}

Json SessionService::submit_posterior(std::string const &session_id,
                                      std::string const &trial_id, Json const &payload)
{
  auto const event = make_posterior_event(trial_id, payload, event_time(payload));
  return apply(session_id, event, [](SessionState const &state, StudyConfig const &config) {
    return Json{{"accepted", true},
                {"sealed", state.sealed},
                {"next", trial_summary(state, config)}};
  });
}

Json SessionService::submit_choice(std::string const &session_id, std::string const &chain_id,
                                   Json const &payload)
{
  if (!payload.is_object())
    throw ParseError("request body must be a JSON object");
  auto const index = require_integer(payload, "trial_index");
  if (index < 0)
    throw InvalidArgument("trial_index must be nonnegative");
  std::optional<double> duration;
  if (payload.contains("duration_ms") && !payload.at("duration_ms").is_null())
    duration = require_number(payload, "duration_ms");
  auto const side = side_from_string(require_string(payload, "side"));
  auto const event = make_choice_event(chain_id, static_cast<std::size_t>(index), side, duration,
                                       event_time(payload));
  return apply(session_id, event, [&](SessionState const &state, StudyConfig const &config) {
    auto const &chain = *state.trial(chain_id).chain;
    return Json{{"accepted", true},
                {"chain_complete", chain.done()},
                {"pending",
                 chain.pending() ? choice_trial_to_json(*chain.pending()) : Json(nullptr)},
                {"next", trial_summary(state, config)}};
  });
}

Json SessionService::submit_attention(std::string const &session_id, std::string const &item_id,
                                      Json const &payload)
{
  if (!payload.is_object())
    throw ParseError("request body must be a JSON object");
  auto const event =
    make_attention_event(item_id, require_string(payload, "answer"), event_time(payload));
  return apply(session_id, event, [](SessionState const &, StudyConfig const &) {
    return Json{{"accepted", true}};
  });
}

Json SessionService::exclusions(std::string const &session_id) const
{
  auto e = entry(session_id);
  std::lock_guard lock(e->mutex);
  Json flags = Json::array();
  for (auto flag : evaluate_exclusions(e->state, *e->config))
    flags.push_back(to_string(flag));
  return Json{{"session_id", session_id},
              {"sealed", e->state.sealed},
              {"flags", std::move(flags)}};
}

ExportBundle SessionService::export_study(std::string const &study_id) const
{
  ExportBundle bundle;
  bundle.study_id = study_id;
  std::string trials = trials_csv_header();
  std::vector<FitScore> scores;
  std::string sessions;
  std::string chains;
  std::string exclusions = "session_id,participant_id,sealed,flags\n";

  for (auto const &id : session_ids(study_id))
  {
    SessionState const state = snapshot(id);
    auto const &config = study(study_id);
    ++bundle.sessions;
    if (state.sealed)
      ++bundle.sealed_sessions;
    trials += trial_csv_rows(state);
    for (auto const &t : state.trials)
    {
      scores.insert(scores.end(), t.scores.begin(), t.scores.end());
      if (!t.chain)
        continue;
      auto const &states = t.chain->states();
      for (std::size_t i = 0; i < states.size(); ++i)
        chains += Json{{"session_id", state.session_id},
                       {"chain", t.descriptor.trial_id},
                       {"pair_id", t.descriptor.pair_id},
                       {"index", i},
                       {"rho", states[i]}}
                    .dump() +
                  "\n";
    }
    auto const flags = evaluate_exclusions(state, config);
    Json snapshot = session_to_json(state);
    Json flag_list = Json::array();
    for (auto flag : flags)
      flag_list.push_back(to_string(flag));
    snapshot["exclusions"] = std::move(flag_list);
    sessions += snapshot.dump() + "\n";
    exclusions += csv_field(state.session_id) + "," + csv_field(state.participant_id) + "," +
                  (state.sealed ? "true" : "false") + "," + flags_field(flags) + "\n";
  }

  bundle.files["trials.csv"] = std::move(trials);
  bundle.files["scores.csv"] = scores_to_csv(scores);
  bundle.files["sessions.jsonl"] = std::move(sessions);
  bundle.files["chains.jsonl"] = std::move(chains);
  bundle.files["exclusions.csv"] = std::move(exclusions);
  Json info{{"study_id", study_id},
            {"sessions", bundle.sessions},
            {"sealed_sessions", bundle.sealed_sessions},
            {"sealed", bundle.sessions > 0 && bundle.sessions == bundle.sealed_sessions},
            {"kld_direction", to_string(KlDirection::ElicitedToPredicted)},
            {"files", Json::array()}};
  for (auto const &[name, content] : bundle.files)
    info["files"].push_back(name);
  bundle.files["bundle.json"] = info.dump(2) + "\n";
  return bundle;
}

}  // namespace corrbelief
