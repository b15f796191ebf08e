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
#include "corrbelief/session.hpp"

#include "corrbelief/errors.hpp"
#include "corrbelief/random.hpp"

#include <algorithm>
#include <cctype>

namespace corrbelief {

namespace {

// Salts for the streams derived from a trial seed.
enum : std::uint64_t
{
  kSaltCongruence = 1,
  kSaltDataset = 2,
  kSaltUniform = 3,
  kSaltHop = 4,
  kSaltPriorOnly = 10,
  kSaltInformed = 11,
};

template <typename T>
void shuffle(std::vector<T> &items, Rng &rng)
{
  for (std::size_t i = items.size(); i > 1; --i)
    std::swap(items[i - 1], items[rng.index(i)]);
}

std::string normalize_answer(std::string text)
{
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  text.erase(text.begin(), std::find_if(text.begin(), text.end(), not_space));
  text.erase(std::find_if(text.rbegin(), text.rend(), not_space).base(), text.end());
  std::transform(text.begin(), text.end(), text.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return text;
}

std::size_t trial_position(SessionState const &state, std::string const &trial_id)
{
  for (std::size_t i = 0; i < state.trials.size(); ++i)
    if (state.trials[i].descriptor.trial_id == trial_id)
      return i;
  throw NotFound("session " + state.session_id + " has no trial '" + trial_id + "'");
}

// Resolves the trial an event targets and checks that it is the one at the
// cursor of an open session.
std::size_t active_trial(SessionState const &state, std::string const &trial_id)
{
  if (state.sealed)
    throw StateError("session " + state.session_id + " is sealed");
  std::size_t const index = trial_position(state, trial_id);
  if (index != state.cursor)
    throw StateError("trial '" + trial_id + "' is not the current trial (out-of-order submission)");
  return index;
}

Overlay make_overlay(Treatment treatment, PosteriorResult const &uniform, StudyConfig const &config,
                     std::uint64_t seed)
{
  Overlay overlay{uniform.mean, std::nullopt, {}, std::nullopt};
  if (treatment == Treatment::Cone || treatment == Treatment::HOP)
    overlay.ci = uniform.ci;
  if (treatment == Treatment::HOP)
  {
    Rng rng(seed);
    auto const &samples = uniform.samples;
    while (overlay.hop_draws.size() < config.hop_draws)
    {
      double const draw = samples[rng.index(samples.size())];
      if (draw >= uniform.ci.lower && draw <= uniform.ci.upper)
        overlay.hop_draws.push_back(draw);
    }
    overlay.frame_ms = config.hop_frame_ms;
  }
  return overlay;
}

std::int64_t event_time(Json const &event)
{
  return require_integer(event, "at_ms");
}

Json chain_to_json(McmcpChain const &chain)
{
  Json responses = Json::array();
  for (auto const &r : chain.responses())
  {
    Json item{{"choice", r.choice == Choice::Current ? "current" : "proposal"},
              {"side", to_string(r.side)}};
    item["duration_ms"] = r.duration_ms ? Json(*r.duration_ms) : Json(nullptr);
    responses.push_back(std::move(item));
  }
  Json out{{"seed", chain.seed()},
           {"target_trials", chain.target_trials()},
           {"states", std::vector<double>(chain.states().begin(), chain.states().end())},
           {"width_history",
            std::vector<double>(chain.width_history().begin(), chain.width_history().end())},
           {"proposal_width", chain.proposal_width()},
           {"accept_count", chain.accept_count()},
           {"responses", std::move(responses)}};
  out["pending"] = chain.pending() ? choice_trial_to_json(*chain.pending()) : Json(nullptr);
  if (chain.states().size() >= 2)
  {
    auto const s = chain.summarize();
    out["summary"] = {{"mean", s.mean}, {"ci", Json::array({s.ci_lower, s.ci_upper})}};
  }
  return out;
}

Json overlay_to_json(Overlay const &overlay)
{
  Json out{{"mean_rho", overlay.mean_rho}};
  if (overlay.ci)
    out["ci"] = Json::array({overlay.ci->lower, overlay.ci->upper});
  if (overlay.frame_ms)
  {
    out["hop_draws"] = overlay.hop_draws;
    out["frame_ms"] = *overlay.frame_ms;
  }
  return out;
}

template <typename T>
Json optional_json(std::optional<T> const &value)
{
  return value ? Json(*value) : Json(nullptr);
}

}  // namespace

char const *to_string(TrialKind kind) noexcept
{
  switch (kind)
  {
  case TrialKind::LineCone:
    return "LineCone";
  case TrialKind::Mcmcp:
    return "Mcmcp";
  case TrialKind::Update:
    return "Update";
  }
  return "unknown";
}

char const *to_string(TrialStage stage) noexcept
{
  switch (stage)
  {
  case TrialStage::AwaitingPrior:
    return "awaiting_prior";
  case TrialStage::AwaitingView:
    return "awaiting_view";
  case TrialStage::AwaitingPosterior:
    return "awaiting_posterior";
  case TrialStage::InChain:
    return "in_chain";
  case TrialStage::Complete:
    return "complete";
  }
  return "unknown";
}

char const *to_string(ExclusionFlag flag) noexcept
{
  switch (flag)
  {
  case ExclusionFlag::FailedAttentionCheck:
    return "FailedAttentionCheck";
  case ExclusionFlag::TooFast:
    return "TooFast";
  case ExclusionFlag::McmcpInvalid:
    return "McmcpInvalid";
  case ExclusionFlag::IncompleteTrials:
    return "IncompleteTrials";
  }
  return "unknown";
}

TrialRecord const &SessionState::trial(std::string const &trial_id) const
{
  return trials[trial_position(*this, trial_id)];
}

TrialRecord const *SessionState::current() const noexcept
{
  return cursor < trials.size() ? &trials[cursor] : nullptr;
}

Treatment assign_treatment(StudyConfig const &config, std::size_t assignment_index)
{
  std::size_t const k = config.treatments.size();
  std::vector<Treatment> block = config.treatments;
  Rng rng(derive_seed(derive_seed(config.seed, hash_string("assignment")), assignment_index / k));
  shuffle(block, rng);
  return block[assignment_index % k];
}

std::uint64_t session_seed(StudyConfig const &config, std::string const &participant_id)
{
  return derive_seed(config.seed, hash_string(participant_id));
}

std::vector<TrialDescriptor> plan_trials(StudyConfig const &config, std::uint64_t seed,
                                         Treatment assigned)
{
  Rng rng(derive_seed(seed, 1));
  std::vector<TrialDescriptor> plan;
  auto add = [&](TrialKind kind, std::string const &pair_id, std::size_t round,
                 Treatment treatment) -> TrialDescriptor & {
    TrialDescriptor d;
    d.trial_id = "t" + std::to_string(plan.size());
    d.kind = kind;
    d.pair_id = pair_id;
    d.round = round;
    d.treatment = treatment;
    d.seed = derive_seed(seed, 100 + plan.size());
    plan.push_back(std::move(d));
    return plan.back();
  };

  switch (config.kind)
  {
  case StudyKind::ElicitationComparison:
  {
    std::vector<std::string> ids;
    for (auto const &r : config.rounds)
      ids.insert(ids.end(), r.pair_ids.begin(), r.pair_ids.end());
    auto line_cone = ids;
    auto chains = ids;
    shuffle(line_cone, rng);
    shuffle(chains, rng);
    bool const chains_first = rng.bernoulli(0.5);
    auto emit_block = [&](std::vector<std::string> const &block, TrialKind kind,
                          std::size_t round) {
      for (auto const &id : block)
        add(kind, id, round, assigned);
    };
    if (chains_first)
    {
      emit_block(chains, TrialKind::Mcmcp, 0);
      emit_block(line_cone, TrialKind::LineCone, 1);
    }
    else
    {
      emit_block(line_cone, TrialKind::LineCone, 0);
      emit_block(chains, TrialKind::Mcmcp, 1);
    }
    break;
  }
  case StudyKind::FixedDatasets:
  {
    for (std::size_t r = 0; r < config.rounds.size(); ++r)
    {
      auto ids = config.rounds[r].pair_ids;
      shuffle(ids, rng);
      for (auto const &id : ids)
      {
        auto const &pair = config.pair(id);
        auto &d = add(TrialKind::Update, id, r, config.rounds[r].treatment.value_or(assigned));
        d.n = config.dataset_size(pair);
        d.rho_pop = pair.rho_pop;
        d.seed = fixed_dataset_seed(config.seed, id);
      }
    }
    break;
  }
  case StudyKind::CongruenceManipulated:
  {
    std::vector<CongruenceCell> cells;
    for (auto kind : {Congruence::Congruent, Congruence::Incongruent})
      for (auto n : config.sample_sizes)
        cells.push_back({kind, n});
    shuffle(cells, rng);
    std::size_t next_cell = 0;
    for (std::size_t r = 0; r < config.rounds.size(); ++r)
    {
      auto ids = config.rounds[r].pair_ids;
      shuffle(ids, rng);
      for (auto const &id : ids)
      {
        auto &d = add(TrialKind::Update, id, r, config.rounds[r].treatment.value_or(assigned));
        d.cell = cells[next_cell++ % cells.size()];
        d.n = d.cell->n;
      }
    }
    break;
  }
  }
  return plan;
}

Json make_created_event(std::string const &session_id, std::string const &participant_id,
                        std::string const &study_id, std::size_t assignment_index,
                        std::int64_t at_ms, Json metadata)
{
  return Json{{"type", "session_created"},
              {"session_id", session_id},
              {"participant_id", participant_id},
              {"study_id", study_id},
              {"assignment_index", assignment_index},
              {"metadata", std::move(metadata)},
              {"at_ms", at_ms}};
}

Json make_prior_event(std::string const &trial_id, Json const &payload, std::int64_t at_ms)
{
  return Json{{"type", "prior_submitted"},
              {"trial_id", trial_id},
              {"mu", require_number(payload, "mu")},
              {"b_lower", require_number(payload, "b_lower")},
              {"b_upper", require_number(payload, "b_upper")},
              {"at_ms", at_ms}};
}

Json make_view_event(std::string const &trial_id, std::int64_t at_ms)
{
  return Json{{"type", "view_ack"}, {"trial_id", trial_id}, {"at_ms", at_ms}};
}

Json make_posterior_event(std::string const &trial_id, Json const &payload, std::int64_t at_ms)
{
  Json event = make_prior_event(trial_id, payload, at_ms);
  event["type"] = "posterior_submitted";
  return event;
}

Json make_choice_event(std::string const &chain_id, std::size_t trial_index, Side side,
                       std::optional<double> duration_ms, std::int64_t at_ms)
{
  return Json{{"type", "mcmcp_choice"},
              {"chain", chain_id},
              {"trial_index", trial_index},
              {"side", to_string(side)},
              {"duration_ms", optional_json(duration_ms)},
              {"at_ms", at_ms}};
}

Json make_attention_event(std::string const &item_id, std::string const &answer,
                          std::int64_t at_ms)
{
  return Json{
    {"type", "attention_answer"}, {"item_id", item_id}, {"answer", answer}, {"at_ms", at_ms}};
}

SessionState start_session(StudyConfig const &config, Json const &created)
{
  if (require_string(created, "type") != "session_created")
    throw ParseError("a session log must start with session_created");
  if (require_string(created, "study_id") != config.study_id)
    throw InvalidArgument("session belongs to a different study");

  SessionState state;
  state.session_id = require_string(created, "session_id");
  state.participant_id = require_string(created, "participant_id");
  state.study_id = config.study_id;
  auto const index = require_integer(created, "assignment_index");
  if (index < 0)
    throw ParseError("assignment_index must be nonnegative");
  state.assignment_index = static_cast<std::size_t>(index);
  state.assigned_treatment = assign_treatment(config, state.assignment_index);
  state.seed = session_seed(config, state.participant_id);
  state.created_at_ms = event_time(created);
  if (created.contains("metadata") && created.at("metadata").is_object())
    state.metadata = created.at("metadata");

  for (auto &descriptor : plan_trials(config, state.seed, state.assigned_treatment))
  {
    TrialRecord record;
    record.descriptor = std::move(descriptor);
    record.stage = TrialStage::AwaitingPrior;
    if (record.descriptor.kind == TrialKind::Mcmcp)
    {
      record.stage = TrialStage::InChain;
      record.chain = McmcpChain::start(record.descriptor.seed, config.mcmcp);
    }
    state.trials.push_back(std::move(record));
  }
  state.events.push_back(created);
  return state;
}

std::vector<PosteriorResult> predict_trial(TrialRecord const &trial, McmcConfig const &mcmc)
{
  if (!trial.prior || !trial.dataset)
    throw StateError("trial '" + trial.descriptor.trial_id + "' has no prior and dataset yet");
  auto const seed = trial.descriptor.seed;
  auto const &prior = trial.prior->fitted;
  std::vector<PosteriorResult> out;
  out.push_back(prior_only(prior, mcmc, derive_seed(seed, kSaltPriorOnly)));
  out.push_back(posterior(*trial.dataset, PriorSpec::informed(prior), mcmc,
                          derive_seed(seed, kSaltInformed)));
  out.push_back(
    posterior(*trial.dataset, PriorSpec::uniform(), mcmc, derive_seed(seed, kSaltUniform)));
  return out;
}

void apply_event(SessionState &state, StudyConfig const &config, Json const &event)
{
  auto const type = require_string(event, "type");
  std::int64_t const at = event_time(event);

  if (type == "attention_answer")
  {
    if (state.sealed)
      throw StateError("session " + state.session_id + " is sealed");
    auto const item = require_string(event, "item_id");
    auto it = std::find_if(config.attention_checks.begin(), config.attention_checks.end(),
                           [&](auto const &a) { return a.id == item; });
    if (it == config.attention_checks.end())
      throw NotFound("no attention check '" + item + "'");
    if (state.attention_answers.count(item))
      throw StateError("attention check '" + item + "' already answered");
    state.attention_answers[item] = require_string(event, "answer");
    state.events.push_back(event);
    return;
  }

  std::string const trial_id =
    type == "mcmcp_choice" ? require_string(event, "chain") : require_string(event, "trial_id");
  std::size_t const index = active_trial(state, trial_id);
  TrialRecord next = state.trials[index];
  auto const &d = next.descriptor;

  if (type == "prior_submitted")
  {
    if (next.stage != TrialStage::AwaitingPrior)
      throw StateError("trial '" + trial_id + "' does not take a prior (stage " +
                       to_string(next.stage) + ")");
    next.prior = elicitation_from_json(event);
    next.prior_at_ms = at;
    if (d.kind == TrialKind::LineCone)
    {
      next.stage = TrialStage::Complete;
    }
    else
    {
      double rho = 0.0;
      std::uint64_t dataset_seed = d.seed;
      if (d.cell)
      {
        next.congruence = resolve_congruence(next.prior->mu, d.cell->kind, config.congruence_clamp,
                                             derive_seed(d.seed, kSaltCongruence));
        rho = next.congruence->resolved_rho;
        dataset_seed = derive_seed(d.seed, kSaltDataset);
      }
      else
      {
        rho = d.rho_pop.value_or(0.0);
      }
      next.dataset = generate_dataset(rho, d.n, dataset_seed);
      if (d.treatment != Treatment::Scatter)
      {
        auto const uniform = posterior(*next.dataset, PriorSpec::uniform(), config.mcmc,
                                       derive_seed(d.seed, kSaltUniform));
        next.overlay = make_overlay(d.treatment, uniform, config, derive_seed(d.seed, kSaltHop));
      }
      next.stage = TrialStage::AwaitingView;
    }
  }
  else if (type == "view_ack")
  {
    if (next.stage != TrialStage::AwaitingView)
      throw StateError("trial '" + trial_id + "' has no dataset awaiting acknowledgement (stage " +
                       to_string(next.stage) + ")");
    next.view_at_ms = at;
    next.stage = TrialStage::AwaitingPosterior;
  }
  else if (type == "posterior_submitted")
  {
    if (next.stage == TrialStage::AwaitingView)
      throw StateError("trial '" + trial_id + "' dataset view was not acknowledged");
    if (next.stage != TrialStage::AwaitingPosterior)
      throw StateError("trial '" + trial_id + "' does not take a posterior (stage " +
                       to_string(next.stage) + ")");
    next.posterior = elicitation_from_json(event);
    next.posterior_at_ms = at;
    next.stage = TrialStage::Complete;
  }
  else if (type == "mcmcp_choice")
  {
    if (next.stage != TrialStage::InChain || !next.chain)
      throw StateError("trial '" + trial_id + "' is not a forced-choice chain");
    auto const trial_index = require_integer(event, "trial_index");
    if (trial_index < 0)
      throw InvalidArgument("trial_index must be nonnegative");
    std::optional<double> duration;
    if (event.contains("duration_ms") && !event.at("duration_ms").is_null())
      duration = require_number(event, "duration_ms");
    next.chain->record_side(static_cast<std::size_t>(trial_index),
                            side_from_string(require_string(event, "side")), duration);
    if (next.chain->done())
      next.stage = TrialStage::Complete;
  }
  else
  {
    throw ParseError("unknown event type '" + type + "'");
  }

  // Everything that can fail runs before the state is touched.
  std::vector<TrialRecord> scored;
  bool const completes_session =
    next.stage == TrialStage::Complete && index + 1 == state.trials.size();
  if (completes_session)
  {
    scored = state.trials;
    scored[index] = next;
    for (auto &trial : scored)
    {
      if (trial.descriptor.kind != TrialKind::Update)
        continue;
      auto const predictions = predict_trial(trial, config.mcmc);
      trial.scores = score_trial(state.session_id + "/" + trial.descriptor.trial_id,
                                 *trial.posterior, predictions);
    }
  }

  if (completes_session)
  {
    state.trials = std::move(scored);
    state.cursor = state.trials.size();
    state.sealed = true;
    state.sealed_at_ms = at;
  }
  else
  {
    state.trials[index] = std::move(next);
    if (state.trials[index].stage == TrialStage::Complete)
      ++state.cursor;
  }
  state.events.push_back(event);
}

SessionState replay(StudyConfig const &config, std::span<Json const> events)
{
  if (events.empty())
    throw ParseError("empty session log");
  SessionState state = start_session(config, events.front());
  for (auto const &event : events.subspan(1))
    apply_event(state, config, event);
  return state;
}

std::set<ExclusionFlag> evaluate_exclusions(SessionState const &state, StudyConfig const &config)
{
  std::set<ExclusionFlag> flags;
  for (auto const &item : config.attention_checks)
  {
    auto it = state.attention_answers.find(item.id);
    if (it == state.attention_answers.end() ||
        normalize_answer(it->second) != normalize_answer(item.answer))
      flags.insert(ExclusionFlag::FailedAttentionCheck);
  }
  bool complete = state.sealed;
  for (auto const &trial : state.trials)
  {
    complete = complete && trial.stage == TrialStage::Complete;
    if (trial.chain && !detect_invalid(trial.chain->responses(), config.exclusion).empty())
      flags.insert(ExclusionFlag::McmcpInvalid);
  }
  if (!complete)
    flags.insert(ExclusionFlag::IncompleteTrials);
  if (state.sealed_at_ms &&
      static_cast<double>(*state.sealed_at_ms - state.created_at_ms) < config.min_total_ms)
    flags.insert(ExclusionFlag::TooFast);
  return flags;
}

Json dataset_view_json(TrialRecord const &trial, VariablePair const &pair)
{
  if (!trial.dataset)
    throw StateError("trial '" + trial.descriptor.trial_id + "' has no dataset yet");
  Json points = Json::array();
  for (auto const &p : trial.dataset->points)
    points.push_back(Json::array({p.x, p.y}));
  Json view{{"trial_id", trial.descriptor.trial_id},
            {"treatment", to_string(trial.descriptor.treatment)},
            {"pair", {{"id", pair.id}, {"label_x", pair.label_x}, {"label_y", pair.label_y}}},
            {"dataset", {{"n", trial.dataset->n()}, {"points", std::move(points)}}}};
  if (trial.overlay)
    view["overlay"] = overlay_to_json(*trial.overlay);
  return view;
}

Json session_to_json(SessionState const &state)
{
  Json trials = Json::array();
  for (auto const &t : state.trials)
  {
    auto const &d = t.descriptor;
    Json item{{"trial_id", d.trial_id},
              {"kind", to_string(d.kind)},
              {"pair_id", d.pair_id},
              {"round", d.round},
              {"treatment", to_string(d.treatment)},
              {"n", d.n},
              {"rho_pop", optional_json(d.rho_pop)},
              {"congruence", d.cell ? Json(to_string(d.cell->kind)) : Json(nullptr)},
              {"seed", d.seed},
              {"stage", to_string(t.stage)},
              {"prior", t.prior ? elicitation_to_json(*t.prior) : Json(nullptr)},
              {"posterior", t.posterior ? elicitation_to_json(*t.posterior) : Json(nullptr)},
              {"resolved_rho",
               t.congruence ? Json(t.congruence->resolved_rho) : Json(nullptr)},
              {"dataset", t.dataset ? dataset_to_json(*t.dataset) : Json(nullptr)},
              {"overlay", t.overlay ? overlay_to_json(*t.overlay) : Json(nullptr)},
              {"chain", t.chain ? chain_to_json(*t.chain) : Json(nullptr)},
              {"prior_at_ms", optional_json(t.prior_at_ms)},
              {"view_at_ms", optional_json(t.view_at_ms)},
              {"posterior_at_ms", optional_json(t.posterior_at_ms)}};
    Json scores = Json::array();
    for (auto const &s : t.scores)
      scores.push_back({{"model", to_string(s.model)}, {"mae", s.mae}, {"kld", s.kld}});
    item["scores"] = std::move(scores);
    trials.push_back(std::move(item));
  }
  Json answers = Json::object();
  for (auto const &[k, v] : state.attention_answers)
    answers[k] = v;
  return Json{{"session_id", state.session_id},
              {"participant_id", state.participant_id},
              {"study_id", state.study_id},
              {"assignment_index", state.assignment_index},
              {"treatment", to_string(state.assigned_treatment)},
              {"status", state.sealed ? "sealed" : "active"},
              {"cursor", state.cursor},
              {"created_at_ms", state.created_at_ms},
              {"sealed_at_ms", optional_json(state.sealed_at_ms)},
              {"attention_answers", std::move(answers)},
              {"metadata", state.metadata},
              {"event_count", state.events.size()},
              {"trials", std::move(trials)}};
}

}  // namespace corrbelief
