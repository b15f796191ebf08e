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
#include "corrbelief/metrics.hpp"

#include "corrbelief/errors.hpp"
#include "corrbelief/format.hpp"

#include <cmath>

namespace corrbelief {

namespace {

std::vector<double> smoothed(RhoGrid const &grid, std::span<double const> weights, double epsilon)
{
  std::vector<double> out(grid.densities().begin(), grid.densities().end());
  double total = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i)
  {
    out[i] += epsilon;
    total += weights[i] * out[i];
  }
  for (double &v : out)
    v /= total;
  return out;
}

}  // namespace

char const *to_string(KlDirection direction) noexcept
{
  return direction == KlDirection::ElicitedToPredicted ? "elicited||predicted"
                                                       : "predicted||elicited";
}

double mae(double predicted_mean, double elicited_mean)
{
  if (!(std::abs(predicted_mean) <= 1.0) || !(std::abs(elicited_mean) <= 1.0))
    throw InvalidArgument("MAE inputs must be correlations in [-1, 1]");
  return std::abs(predicted_mean - elicited_mean);
}

double kld(RhoGrid const &elicited, RhoGrid const &predicted, double epsilon)
{
  if (!elicited.shares_points(predicted))
    throw InvalidArgument("KLD requires both densities on the same grid");
  if (!(epsilon >= 0.0))
    throw InvalidArgument("KLD smoothing must be nonnegative");
  auto const weights = elicited.trapezoid_weights();
  auto const p = smoothed(elicited, weights, epsilon);
  auto const q = smoothed(predicted, weights, epsilon);
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
  {
    if (p[i] > 0.0)
      total += weights[i] * p[i] * std::log(p[i] / q[i]);
  }
  return std::max(total, 0.0);
}

std::vector<FitScore> score_trial(std::string const &trial_id,
                                  ElicitationRecord const &elicited_posterior,
                                  std::span<PosteriorResult const> predictions,
                                  KlDirection direction)
{
  std::vector<FitScore> scores;
  scores.reserve(predictions.size());
  for (auto const &prediction : predictions)
  {
    auto const &points = prediction.grid.points();
    std::vector<double> log_density(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
      log_density[i] = elicited_posterior.fitted.log_pdf(points[i]);
    auto const elicited = RhoGrid::from_log_densities({points.begin(), points.end()}, log_density);
    double const divergence = direction == KlDirection::ElicitedToPredicted
                                ? kld(elicited, prediction.grid)
                                : kld(prediction.grid, elicited);
    scores.push_back(FitScore{trial_id, prediction.model,
                              mae(prediction.mean, elicited_posterior.mu), divergence});
  }
  return scores;
}

std::string scores_to_csv(std::span<FitScore const> scores)
{
  std::string out = "trial_id,model,mae,kld\n";
  for (auto const &s : scores)
  {
    out += csv_field(s.trial_id);
    out += ',';
    out += to_string(s.model);
    out += ',';
    out += format_double(s.mae);
    out += ',';
    out += format_double(s.kld);
    out += '\n';
  }
  return out;
}

}  // namespace corrbelief
