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

// Shared helpers for tests that drive whole sessions.

#include "corrbelief/serialization.hpp"
#include "corrbelief/study.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#ifndef CORRBELIEF_CONFIG_DIR
#error "CORRBELIEF_CONFIG_DIR must point at the shipped study configs"
#endif

namespace corrbelief::testing {

inline std::string config_path(std::string const &name)
{
  return std::string(CORRBELIEF_CONFIG_DIR) + "/" + name;
}

inline Json load_json(std::string const &name)
{
  std::ifstream in(config_path(name));
  if (!in)
    throw std::runtime_error("cannot open " + config_path(name));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_json(buffer.str());
}

/// Shipped study config with a cheaper posterior sampler.
inline StudyConfig quick_study(std::string const &name, std::size_t samples_per_chain = 2000)
{
  auto j = load_json(name);
  j["mcmc"] = {{"samples_per_chain", samples_per_chain}, {"burn_in", 200}};
  auto config = study_config_from_json(j);
  config.validate();
  return config;
}

inline Json elicitation(double mu, double lower, double upper)
{
  return Json{{"mu", mu}, {"b_lower", lower}, {"b_upper", upper}};
}

}  // namespace corrbelief::testing
