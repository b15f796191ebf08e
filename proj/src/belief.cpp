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
#include "corrbelief/belief.hpp"

#include "corrbelief/errors.hpp"
#include "corrbelief/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace corrbelief {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

// Bracket width at which quantile bisection stops.
constexpr double kBisectionWidth = 1e-13;

bool in_support(double rho) noexcept
{
  return rho >= BoundedNormalBelief::kLower && rho <= BoundedNormalBelief::kUpper;
}

}  // namespace

double standard_normal_pdf(double z) noexcept
{
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double standard_normal_cdf(double z) noexcept
{
  return 0.5 * std::erfc(-z * kInvSqrt2);
}

double standard_normal_mass(double z1, double z2) noexcept
{
  if (z2 <= z1)
    return 0.0;
  if (z1 >= 0.0)
    return 0.5 * (std::erfc(z1 * kInvSqrt2) - std::erfc(z2 * kInvSqrt2));
  if (z2 <= 0.0)
    return 0.5 * (std::erfc(-z2 * kInvSqrt2) - std::erfc(-z1 * kInvSqrt2));
  return 0.5 * (std::erf(z2 * kInvSqrt2) - std::erf(z1 * kInvSqrt2));
}

// Acklam's rational approximation, polished with one Halley step against erfc.
double standard_normal_quantile(double p)
{
  if (!(p > 0.0 && p < 1.0))
    throw InvalidArgument("normal quantile level must lie in (0, 1)");
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x = 0.0;
  if (p < p_low)
  {
    double const q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  else if (p <= 1.0 - p_low)
  {
    double const q = p - 0.5;
    double const r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  else
  {
    double const q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  double const e = standard_normal_cdf(x) - p;
  double const u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

BoundedNormalBelief::BoundedNormalBelief(double mu, double sigma)
  : mu_(mu), sigma_(sigma), mass_(0.0)
{
  if (!(mu >= kLower && mu <= kUpper))
    throw InvalidArgument("belief location must lie in [-1, 1], got " + std::to_string(mu));
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw InvalidArgument("belief scale must be positive and finite, got " +
                          std::to_string(sigma));
  mass_ = standard_normal_mass((kLower - mu) / sigma, (kUpper - mu) / sigma);
}

double BoundedNormalBelief::pdf(double rho) const noexcept
{
  if (!in_support(rho))
    return 0.0;
  return standard_normal_pdf((rho - mu_) / sigma_) / (sigma_ * mass_);
}

double BoundedNormalBelief::log_pdf(double rho) const noexcept
{
  if (!in_support(rho))
    return -std::numeric_limits<double>::infinity();
  double const z = (rho - mu_) / sigma_;
  return -0.5 * z * z - 0.5 * std::log(2.0 * std::numbers::pi) - std::log(sigma_ * mass_);
}

double BoundedNormalBelief::cdf(double rho) const noexcept
{
  if (rho <= kLower)
    return 0.0;
  if (rho >= kUpper)
    return 1.0;
  double const value = standard_normal_mass((kLower - mu_) / sigma_, (rho - mu_) / sigma_) / mass_;
  return std::clamp(value, 0.0, 1.0);
}

double BoundedNormalBelief::quantile(double p) const
{
  if (!(p > 0.0 && p < 1.0))
    throw InvalidArgument("quantile level must lie in (0, 1), got " + std::to_string(p));
  double lo = kLower;
  double hi = kUpper;
  for (int i = 0; i < 200 && hi - lo > kBisectionWidth; ++i)
  {
    double const mid = 0.5 * (lo + hi);
    if (cdf(mid) < p)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double BoundedNormalBelief::mean() const noexcept
{
  double const alpha = (kLower - mu_) / sigma_;
  double const beta = (kUpper - mu_) / sigma_;
  double const m = mu_ + sigma_ * (standard_normal_pdf(alpha) - standard_normal_pdf(beta)) / mass_;
  return std::clamp(m, kLower, kUpper);
}

Interval BoundedNormalBelief::central_interval(double coverage) const
{
  if (!(coverage > 0.0 && coverage < 1.0))
    throw InvalidArgument("coverage must lie in (0, 1)");
  double const tail = 0.5 * (1.0 - coverage);
  return {quantile(tail), quantile(1.0 - tail)};
}

std::vector<double> BoundedNormalBelief::sample(std::uint64_t seed, std::size_t count) const
{
  // Closed-form inverse CDF. The level is taken from whichever tail keeps it
  // below one half so that draws near either truncation point stay accurate.
  double const lower_tail = standard_normal_cdf((kLower - mu_) / sigma_);
  double const upper_tail = standard_normal_cdf(-(kUpper - mu_) / sigma_);
  Rng rng(seed);
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
  {
    double const u = rng.uniform_open();
    double const p = lower_tail + u * mass_;
    double z = 0.0;
    if (p <= 0.5)
      z = standard_normal_quantile(p);
    else
      z = -standard_normal_quantile(upper_tail + (1.0 - u) * mass_);
    out.push_back(std::clamp(mu_ + sigma_ * z, kLower, kUpper));
  }
  return out;
}

ElicitationRecord fit_from_elicitation(double mu, double b_lower, double b_upper)
{
  auto check = [](double v, char const *name) {
    if (!(v >= -1.0 && v <= 1.0))
      throw InvalidArgument(std::string(name) + " must lie in [-1, 1], got " + std::to_string(v));
  };
  check(mu, "mu");
  check(b_lower, "b_lower");
  check(b_upper, "b_upper");
  if (!(b_lower <= mu && mu <= b_upper))
    throw InvalidArgument("elicitation bounds must satisfy b_lower <= mu <= b_upper");

  double const sigma = std::max((b_upper - b_lower) / (2.0 * kZ95), kSigmaMin);
  return ElicitationRecord{mu, b_lower, b_upper, BoundedNormalBelief(mu, sigma)};
}

double trapezoid(std::span<double const> points, std::span<double const> values)
{
  double total = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i)
    total += 0.5 * (values[i] + values[i - 1]) * (points[i] - points[i - 1]);
  return total;
}

std::vector<double> RhoGrid::make_points(std::size_t count, double edge)
{
  if (count < 3 || !(edge > 0.0 && edge < 1.0))
    throw InvalidArgument("grid needs at least 3 points and an edge in (0, 1)");
  std::vector<double> points(count);
  auto const last = static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i)
    points[i] = edge * ((2.0 * static_cast<double>(i) - last) / last);
  return points;
}

RhoGrid::RhoGrid(std::vector<double> points, std::vector<double> densities)
  : points_(std::move(points)), densities_(std::move(densities))
{
  if (points_.size() < 2 || points_.size() != densities_.size())
    throw InvalidArgument("grid points and densities must have equal length >= 2");
  for (std::size_t i = 1; i < points_.size(); ++i)
    if (!(points_[i] > points_[i - 1]))
      throw InvalidArgument("grid points must be strictly increasing");
  for (double d : densities_)
    if (!(d >= 0.0) || !std::isfinite(d))
      throw InvalidArgument("grid densities must be finite and nonnegative");
  double const total = trapezoid(points_, densities_);
  if (!(total > 0.0))
    throw InvalidArgument("grid density has zero mass");
  for (double &d : densities_)
    d /= total;
}

RhoGrid RhoGrid::from_log_densities(std::vector<double> points,
                                    std::span<double const> log_densities)
{
  double const peak = *std::max_element(log_densities.begin(), log_densities.end());
  if (!std::isfinite(peak))
    throw InvalidArgument("log density has no finite maximum");
  std::vector<double> densities(log_densities.size());
  std::transform(log_densities.begin(), log_densities.end(), densities.begin(),
                 [peak](double v) { return std::exp(v - peak); });
  return RhoGrid(std::move(points), std::move(densities));
}

RhoGrid RhoGrid::from_belief(BoundedNormalBelief const &belief, std::size_t count, double edge)
{
  auto points = make_points(count, edge);
  std::vector<double> log_densities(points.size());
  std::transform(points.begin(), points.end(), log_densities.begin(),
                 [&belief](double r) { return belief.log_pdf(r); });
  return from_log_densities(std::move(points), log_densities);
}

std::vector<double> RhoGrid::trapezoid_weights() const
{
  std::vector<double> weights(points_.size(), 0.0);
  for (std::size_t i = 1; i < points_.size(); ++i)
  {
    double const half = 0.5 * (points_[i] - points_[i - 1]);
    weights[i - 1] += half;
    weights[i] += half;
  }
  return weights;
}

double RhoGrid::integral() const
{
  return trapezoid(points_, densities_);
}

double RhoGrid::mean() const
{
  std::vector<double> weighted(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i)
    weighted[i] = points_[i] * densities_[i];
  return trapezoid(points_, weighted) / integral();
}

// The density is linear between grid points, so the CDF is quadratic on each
// segment and can be inverted exactly.
double RhoGrid::quantile(double p) const
{
  if (!(p > 0.0 && p < 1.0))
    throw InvalidArgument("quantile level must lie in (0, 1)");
  double const target = p * integral();
  double cumulative = 0.0;
  for (std::size_t i = 1; i < points_.size(); ++i)
  {
    double const h = points_[i] - points_[i - 1];
    double const f0 = densities_[i - 1];
    double const f1 = densities_[i];
    double const segment = 0.5 * (f0 + f1) * h;
    if (cumulative + segment >= target)
    {
      double const need = target - cumulative;
      double const slope = (f1 - f0) / h;
      // Root of slope/2 t^2 + f0 t - need = 0 in the cancellation-free form.
      double const disc = std::max(f0 * f0 + 2.0 * slope * need, 0.0);
      double const denom = f0 + std::sqrt(disc);
      double const t = denom > 0.0 ? 2.0 * need / denom : 0.5 * h;
      return points_[i - 1] + std::clamp(t, 0.0, h);
    }
    cumulative += segment;
  }
  return points_.back();
}

Interval RhoGrid::central_interval(double coverage) const
{
  double const tail = 0.5 * (1.0 - coverage);
  return {quantile(tail), quantile(1.0 - tail)};
}

bool RhoGrid::shares_points(RhoGrid const &other) const noexcept
{
  return points_ == other.points_;
}

}  // namespace corrbelief
