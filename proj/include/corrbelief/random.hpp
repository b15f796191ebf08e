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

#include <cstdint>
#include <random>
#include <string_view>

namespace corrbelief {

/// Mixes a base seed with a salt (SplitMix64 finalizer). Used to give every
/// chain, trial and participant an independent, reproducible stream.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) noexcept;

/// 64-bit FNV-1a; stable across platforms, used to salt seeds with ids.
std::uint64_t hash_string(std::string_view text) noexcept;

/// Seeded random source. Distributions are implemented here rather than via
/// <random> distribution classes so that output is identical across standard
/// library implementations.
class Rng
{
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1).
  double uniform();

  /// Uniform on (0, 1).
  double uniform_open();

  double standard_normal();

  double normal(double mean, double sd) { return mean + sd * standard_normal(); }

  /// Uniform integer on [0, n).
  std::uint64_t index(std::uint64_t n);

  bool bernoulli(double p) { return uniform() < p; }

private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace corrbelief
