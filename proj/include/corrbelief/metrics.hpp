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
#include "corrbelief/belief.hpp"

#include <span>
#include <string>
#include <vector>

namespace corrbelief {

/// Additive smoothing applied to every density before the KL sum.
inline constexpr double kKldEpsilon = 1e-9;

/// Which way round the Kullback-Leibler divergence is taken.
enum class KlDirection
{
  ElicitedToPredicted,  ///< KL(elicited || predicted), the default
  PredictedToElicited
};

char const *to_string(KlDirection direction) noexcept;

struct FitScore
{
  std::string trial_id;
  Model model;
  double mae;
  double kld;
};

/// |predicted - elicited|; both must lie in [-1, 1].
double mae(double predicted_mean, double elicited_mean);

/// KL(p || q) of two densities on the same grid, in nats. Each density gets
/// epsilon added and is trapezoid-renormalized; the sum is weighted by the
/// trapezoid weights so that it is a KL divergence of grid cell masses
/// (hence never negative). Throws InvalidArgument on mismatched grids.
double kld(RhoGrid const &elicited, RhoGrid const &predicted, double epsilon = kKldEpsilon);

/// One score per prediction, comparing the elicited posterior (discretized
/// fitted belief on the prediction's grid) against each model.
std::vector<FitScore> score_trial(std::string const &trial_id,
                                  ElicitationRecord const &elicited_posterior,
                                  std::span<PosteriorResult const> predictions,
                                  KlDirection direction = KlDirection::ElicitedToPredicted);

/// "trial_id,model,mae,kld" table.
std::string scores_to_csv(std::span<FitScore const> scores);

}  // namespace corrbelief
