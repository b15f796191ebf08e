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

#include "corrbelief/bayes.hpp"
#include "corrbelief/dataset.hpp"
#include "corrbelief/mcmcp.hpp"
#include "corrbelief/serialization.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace corrbelief {

enum class StudyKind
{
  /// Line+Cone and MCMC-P priors for the same pairs; no datasets.
  ElicitationComparison,
  /// Every participant sees the same dataset per pair (fixed rho_pop).
  FixedDatasets,
  /// Datasets generated from each participant's prior (congruence x n cells).
  CongruenceManipulated
};

enum class Treatment
{
  Scatter,
  Line,
  Cone,
  HOP
};

char const *to_string(StudyKind kind) noexcept;
char const *to_string(Treatment treatment) noexcept;
StudyKind study_kind_from_string(std::string const &text);
Treatment treatment_from_string(std::string const &text);

struct VariablePair
{
  std::string id;
  std::string label_x;
  std::string label_y;
  std::optional<double> rho_pop;
  /// Overrides the study's first sample size (fixed-dataset studies only).
  std::optional<std::size_t> n;
};

/// A block of trials. An empty `treatment` means "the participant's assigned
/// treatment".
struct Round
{
  std::optional<Treatment> treatment;
  std::vector<std::string> pair_ids;
};

struct AttentionItem
{
  std::string id;
  std::string question;
  std::string answer;
};

struct StudyConfig
{
  std::string study_id;
  StudyKind kind = StudyKind::FixedDatasets;
  std::vector<VariablePair> pairs;
  /// Treatments participants are randomized between.
  std::vector<Treatment> treatments;
  std::vector<Round> rounds;
  std::vector<std::size_t> sample_sizes{100};
  std::uint64_t seed = 0;
  std::vector<AttentionItem> attention_checks;

  McmcConfig mcmc;
  McmcpConfig mcmcp;
  ExclusionThresholds exclusion;
  /// Sessions shorter than this are flagged TooFast.
  double min_total_ms = 5.0 * 60.0 * 1000.0;
  std::size_t hop_draws = 50;
  double hop_frame_ms = 400.0;
  double congruence_clamp = kCongruenceClamp;

  VariablePair const &pair(std::string const &id) const;
  std::size_t dataset_size(VariablePair const &pair) const;

  /// Throws InvalidArgument when an invariant is broken (see StudyKind).
  void validate() const;
};

/// Parses and validates. Missing `rounds` get the kind's default layout:
/// fixed-dataset studies split the pairs into a Scatter round and an
/// assigned-treatment round; the other kinds use one assigned round.
StudyConfig study_config_from_json(Json const &payload);
Json study_config_to_json(StudyConfig const &config);

/// Seed of the shared dataset for a pair in a fixed-dataset study.
std::uint64_t fixed_dataset_seed(std::uint64_t study_seed, std::string const &pair_id);

}  // namespace corrbelief
