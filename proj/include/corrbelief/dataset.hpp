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

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace corrbelief {

struct Point
{
  double x;
  double y;

  friend bool operator==(Point const &, Point const &) = default;
};

/// Pearson correlation of the points. Throws InvalidArgument for fewer than
/// two points or a zero-variance coordinate.
double pearson(std::span<Point const> points);

/// Mean-centered bivariate sample with its realized correlation.
struct CorrelationDataset
{
  std::vector<Point> points;
  double rho_pop = 0.0;
  double r_sample = 0.0;

  std::size_t n() const noexcept { return points.size(); }

  /// Wraps observed points (e.g. what a participant was shown); re-centers
  /// them and computes r_sample. `rho_pop` is informational.
  static CorrelationDataset from_points(std::vector<Point> points, double rho_pop = 0.0);

  friend bool operator==(CorrelationDataset const &, CorrelationDataset const &) = default;
};

/// Draws n points from a standard bivariate normal with correlation rho_pop
/// (y = rho x + sqrt(1 - rho^2) z), then mean-centers both coordinates.
/// Throws InvalidArgument if |rho_pop| > 0.99 or n < 3.
CorrelationDataset generate_dataset(double rho_pop, std::size_t n, std::uint64_t seed);

/// "x,y" CSV with one row per point.
std::string dataset_to_csv(CorrelationDataset const &dataset);

enum class Congruence
{
  Congruent,
  Incongruent
};

inline constexpr double kCongruentOffset = 0.25;
inline constexpr double kIncongruentOffset = 1.0;
inline constexpr double kCongruenceClamp = 0.95;

/// Magnitude used when an incongruent shift lands exactly on zero
/// (|prior_mu| == 1), so the sign flip still holds.
inline constexpr double kIncongruentFloor = 0.05;

struct CongruenceSpec
{
  Congruence kind;
  double offset;
  double prior_mu;
  double resolved_rho;
};

/// Population correlation for a dataset shown against a prior mean:
/// Congruent shifts 0.25 toward zero, Incongruent shifts 1.0 across zero,
/// both clamped to [-clamp, clamp]. A zero prior mean resolves to 0
/// (Congruent) or to a seeded random sign at full offset (Incongruent).
CongruenceSpec resolve_congruence(double prior_mu, Congruence kind,
                                  double clamp = kCongruenceClamp, std::uint64_t seed = 0);

char const *to_string(Congruence kind) noexcept;
Congruence congruence_from_string(std::string const &text);

}  // namespace corrbelief
