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
#include <vector>

namespace corrbelief {

/// Smallest scale a fitted belief may take; a zero-width cone maps here.
inline constexpr double kSigmaMin = 0.01;

/// Half-width of a central 95% normal interval, in standard deviations.
inline constexpr double kZ95 = 1.96;

double standard_normal_pdf(double z) noexcept;
double standard_normal_cdf(double z) noexcept;

/// Inverse of standard_normal_cdf. Throws InvalidArgument unless 0 < p < 1.
double standard_normal_quantile(double p);

/// P(z1 < Z < z2) for a standard normal Z, evaluated with whichever of
/// erf / erfc keeps the difference accurate.
double standard_normal_mass(double z1, double z2) noexcept;

struct Interval
{
  double lower = 0.0;
  double upper = 0.0;

  double width() const noexcept { return upper - lower; }
};

/// Normal distribution over a correlation coefficient, truncated to [-1, 1].
/// `mu` and `sigma` are the location and scale of the parent normal.
class BoundedNormalBelief
{
public:
  static constexpr double kLower = -1.0;
  static constexpr double kUpper = 1.0;

  /// Throws InvalidArgument unless -1 <= mu <= 1 and sigma is positive and finite.
  BoundedNormalBelief(double mu, double sigma);

  double mu() const noexcept { return mu_; }
  double sigma() const noexcept { return sigma_; }

  /// Probability that the parent normal lands inside [-1, 1].
  double truncation_mass() const noexcept { return mass_; }

  /// Zero outside [-1, 1].
  double pdf(double rho) const noexcept;
  /// -infinity outside [-1, 1].
  double log_pdf(double rho) const noexcept;
  double cdf(double rho) const noexcept;

  /// Inverse CDF by bisection. Throws InvalidArgument unless 0 < p < 1.
  double quantile(double p) const;

  /// Mean of the truncated distribution (not `mu` unless untruncated).
  double mean() const noexcept;

  Interval central_interval(double coverage = 0.95) const;

  /// Inverse-CDF draws (closed form, not bisection); deterministic for a
  /// fixed seed.
  std::vector<double> sample(std::uint64_t seed, std::size_t count) const;

  friend bool operator==(BoundedNormalBelief const &, BoundedNormalBelief const &) = default;

private:
  double mu_;
  double sigma_;
  double mass_;
};

/// A Line+Cone response: most-likely correlation plus cone bounds, with the
/// belief distribution it maps to.
struct ElicitationRecord
{
  double mu;
  double b_lower;
  double b_upper;
  BoundedNormalBelief fitted;

  double ci_width() const noexcept { return b_upper - b_lower; }

  friend bool operator==(ElicitationRecord const &, ElicitationRecord const &) = default;
};

/// Maps a cone to a belief: the bounds are read as an untruncated central 95%
/// interval, sigma = (b_upper - b_lower) / (2 * 1.96), floored at kSigmaMin.
/// Throws InvalidArgument on values outside [-1, 1] or unordered bounds.
ElicitationRecord fit_from_elicitation(double mu, double b_lower, double b_upper);

/// Density tabulated on evenly spaced correlation values strictly inside
/// (-1, 1). Densities are kept trapezoid-normalized.
class RhoGrid
{
public:
  static constexpr std::size_t kDefaultCount = 201;
  static constexpr double kDefaultEdge = 0.999;

  /// Evenly spaced points on [-edge, edge].
  static std::vector<double> make_points(std::size_t count = kDefaultCount,
                                         double edge = kDefaultEdge);

  /// Normalizes the given (unnormalized, nonnegative) densities.
  RhoGrid(std::vector<double> points, std::vector<double> densities);

  /// Builds a grid from log densities, subtracting the maximum before
  /// exponentiating.
  static RhoGrid from_log_densities(std::vector<double> points,
                                    std::span<double const> log_densities);

  static RhoGrid from_belief(BoundedNormalBelief const &belief,
                             std::size_t count = kDefaultCount, double edge = kDefaultEdge);

  std::span<double const> points() const noexcept { return points_; }
  std::span<double const> densities() const noexcept { return densities_; }
  std::size_t size() const noexcept { return points_.size(); }

  /// Trapezoid weight of each point; sum(weights[i] * densities[i]) == 1.
  std::vector<double> trapezoid_weights() const;

  double integral() const;
  double mean() const;
  double quantile(double p) const;
  Interval central_interval(double coverage = 0.95) const;

  /// Same point set (bitwise).
  bool shares_points(RhoGrid const &other) const noexcept;

  friend bool operator==(RhoGrid const &, RhoGrid const &) = default;

private:
  std::vector<double> points_;
  std::vector<double> densities_;
};

/// Trapezoid integral of `values` over increasing `points`.
double trapezoid(std::span<double const> points, std::span<double const> values);

}  // namespace corrbelief
