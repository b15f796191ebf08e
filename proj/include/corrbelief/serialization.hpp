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

// JSON wire forms shared by the service, the C API and the CLI.

#include "corrbelief/bayes.hpp"
#include "corrbelief/belief.hpp"
#include "corrbelief/dataset.hpp"
#include "corrbelief/mcmcp.hpp"

#include "json.hpp"

#include <string>

namespace corrbelief {

using Json = nlohmann::ordered_json;

/// Flat {mu, b_lower, b_upper}.
Json elicitation_to_json(ElicitationRecord const &record);
/// Parses and validates; throws ParseError on missing or non-numeric fields and
/// InvalidArgument on range or ordering violations.
ElicitationRecord elicitation_from_json(Json const &payload);

/// {n, rho_pop, r_sample, points: [[x, y], ...]}.
Json dataset_to_json(CorrelationDataset const &dataset);
/// Accepts the same shape. Points are taken as given; r_sample is recomputed.
CorrelationDataset dataset_from_json(Json const &payload);

Json grid_to_json(RhoGrid const &grid);
Json mcmc_config_to_json(McmcConfig const &config);
McmcConfig mcmc_config_from_json(Json const &payload, McmcConfig defaults = {});
/// {trials, initial_width, target_acceptance, adapt_every, boundary: "reflect" | "resample"}.
Json mcmcp_config_to_json(McmcpConfig const &config);
McmcpConfig mcmcp_config_from_json(Json const &payload, McmcpConfig defaults = {});

/// {model, mean, ci: [lo, hi], grid: {points, densities}, config}.
Json posterior_to_json(PosteriorResult const &result);
/// One {"index": i, "rho": value} object per line.
std::string samples_to_json_lines(PosteriorResult const &result);

/// {trial_index, left_rho, right_rho}.
Json choice_trial_to_json(ChoiceTrial const &trial);

/// Reads a required number / string / integer field, throwing ParseError.
double require_number(Json const &object, char const *key);
std::string require_string(Json const &object, char const *key);
std::int64_t require_integer(Json const &object, char const *key);

/// Parses text, mapping syntax errors to ParseError.
Json parse_json(std::string const &text);

}  // namespace corrbelief
