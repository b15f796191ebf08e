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
#include "corrbelief/dataset.hpp"

#include "corrbelief/errors.hpp"
#include "corrbelief/random.hpp"
#include "corrbelief/format.hpp"

#include <algorithm>
#include <cmath>

namespace corrbelief {

namespace {

void center(std::vector<Point> &points)
{
  double sx = 0.0;
  double sy = 0.0;
  for (auto const &p : points)
  {
    sx += p.x;
    sy += p.y;
  }
  double const mx = sx / static_cast<double>(points.size());
  double const my = sy / static_cast<double>(points.size());
  for (auto &p : points)
  {
    p.x -= mx;
    p.y -= my;
  }
}

double sign(double v) noexcept
{
  return (v > 0.0) - (v < 0.0);
}

}  // namespace

double pearson(std::span<Point const> points)
{
  if (points.size() < 2)
    throw InvalidArgument("correlation needs at least two points");
  auto const n = static_cast<double>(points.size());
  double mx = 0.0;
  double my = 0.0;
  for (auto const &p : points)
  {
    mx += p.x;
    my += p.y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (auto const &p : points)
  {
    double const dx = p.x - mx;
    double const dy = p.y - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (!(sxx > 0.0 && syy > 0.0))
    throw InvalidArgument("correlation undefined for a zero-variance coordinate");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

CorrelationDataset CorrelationDataset::from_points(std::vector<Point> points, double rho_pop)
{
  if (points.size() < 3)
    throw InvalidArgument("a dataset needs at least 3 points");
  center(points);
  double const r = pearson(points);
  return CorrelationDataset{std::move(points), rho_pop, r};
}

CorrelationDataset generate_dataset(double rho_pop, std::size_t n, std::uint64_t seed)
{
  if (!(std::abs(rho_pop) <= 0.99))
    throw InvalidArgument("population correlation must satisfy |rho| <= 0.99");
  if (n < 3)
    throw InvalidArgument("a dataset needs at least 3 points");

  Rng rng(seed);
  double const residual = std::sqrt(1.0 - rho_pop * rho_pop);
  std::vector<Point> points;
  points.reserve(n);
  for (std::size_t i = 0; i < n; ++i)
  {
    double const x = rng.standard_normal();
    double const z = rng.standard_normal();
    points.push_back({x, rho_pop * x + residual * z});
  }
  return CorrelationDataset::from_points(std::move(points), rho_pop);
}

std::string dataset_to_csv(CorrelationDataset const &dataset)
{
  std::string out = "x,y\n";
  for (auto const &p : dataset.points)
  {
    out += format_double(p.x);
    out += ',';
    out += format_double(p.y);
    out += '\n';
  }
  return out;
}

CongruenceSpec resolve_congruence(double prior_mu, Congruence kind, double clamp,
                                  std::uint64_t seed)
{
  if (!(prior_mu >= -1.0 && prior_mu <= 1.0))
    throw InvalidArgument("prior mean must lie in [-1, 1]");
  if (!(clamp > 0.0 && clamp < 1.0))
    throw InvalidArgument("congruence clamp must lie in (0, 1)");

  double const offset = kind == Congruence::Congruent ? kCongruentOffset : kIncongruentOffset;
  double direction = sign(prior_mu);
  double resolved = 0.0;
  if (direction == 0.0)
  {
    if (kind == Congruence::Incongruent)
    {
      Rng rng(seed);
      resolved = rng.bernoulli(0.5) ? offset : -offset;
    }
  }
  else
  {
    resolved = prior_mu - offset * direction;
    if (kind == Congruence::Incongruent && resolved == 0.0)
      resolved = -direction * kIncongruentFloor;
  }
  resolved = std::clamp(resolved, -clamp, clamp);
  return CongruenceSpec{kind, offset, prior_mu, resolved};
}

char const *to_string(Congruence kind) noexcept
{
  return kind == Congruence::Congruent ? "Congruent" : "Incongruent";
}

Congruence congruence_from_string(std::string const &text)
{
  if (text == "Congruent")
    return Congruence::Congruent;
  if (text == "Incongruent")
    return Congruence::Incongruent;
  throw ParseError("unknown congruence '" + text + "'");
}

}  // namespace corrbelief
