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

#include "corrbelief/belief.hpp"
#include "corrbelief/dataset.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace corrbelief {

enum class Model
{
  PriorOnly,
  BayesianInformed,
  BayesianUniform
};

char const *to_string(Model model) noexcept;
Model model_from_string(std::string const &text);

inline constexpr Model kAllModels[] = {Model::PriorOnly, Model::BayesianInformed,
                                       Model::BayesianUniform};

/// Prior over rho: either an elicited bounded normal or Uniform(-1, 1).
class PriorSpec
{
public:
  static PriorSpec uniform() { return PriorSpec(std::nullopt); }
  static PriorSpec informed(BoundedNormalBelief belief) { return PriorSpec(belief); }

  bool is_uniform() const noexcept { return !belief_; }
  std::optional<BoundedNormalBelief> const &belief() const noexcept { return belief_; }

  /// log(1/2) on [-1, 1] for the uniform prior; -infinity outside.
  double log_density(double rho) const noexcept;

private:
  explicit PriorSpec(std::optional<BoundedNormalBelief> belief) : belief_(belief) {}
  std::optional<BoundedNormalBelief> belief_;
};

/// Chain layout for the posterior sampler. `samples_per_chain` counts kept
/// draws; each chain runs burn_in + samples_per_chain iterations.
struct McmcConfig
{
  std::size_t chains = 2;
  std::size_t samples_per_chain = 20000;
  std::size_t burn_in = 1000;
  double proposal_width = 0.1;
  /// Divergence guard: lower acceptance raises SamplerFailure.
  double min_acceptance = 0.01;

  friend bool operator==(McmcConfig const &, McmcConfig const &) = default;
};

struct PosteriorResult
{
  Model model;
  std::vector<double> samples;
  double mean;
  Interval ci;
  RhoGrid grid;
  McmcConfig config;
  /// Post-burn-in acceptance rate; 1 for the prior-only model.
  double acceptance_rate;
};

/// Sufficient statistics of z-scored data (population standard deviation),
/// so that the likelihood is maximized exactly at r_sample.
struct StandardizedData
{
  std::size_t n = 0;
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;

  static StandardizedData from(CorrelationDataset const &dataset);

  /// Throws InvalidArgument unless |rho| < 1.
  double log_likelihood(double rho) const;
};

/// Bivariate standard normal log likelihood of points taken as already
/// standardized: sum of -log(2 pi) - log(1 - rho^2)/2
/// - (x^2 - 2 rho x y + y^2) / (2 (1 - rho^2)). Throws unless |rho| < 1.
double log_likelihood_standardized(std::span<Point const> points, double rho);

/// Likelihood of the dataset after z-scoring each coordinate.
double log_likelihood(CorrelationDataset const &dataset, double rho);

/// Random-walk Metropolis on rho with fixed Gaussian proposals. Chains are
/// pooled chain-major. Throws SamplerFailure when the acceptance rate falls
/// below config.min_acceptance.
PosteriorResult posterior(CorrelationDataset const &dataset, PriorSpec const &prior,
                          McmcConfig const &config, std::uint64_t seed);

/// Deterministic oracle: prior times likelihood on the shared grid, in log
/// space, trapezoid-normalized.
RhoGrid posterior_grid(CorrelationDataset const &dataset, PriorSpec const &prior,
                       std::size_t count = RhoGrid::kDefaultCount);

/// No-update baseline: mean, interval and grid are the prior's analytic
/// values; samples are drawn from the prior.
PosteriorResult prior_only(BoundedNormalBelief const &prior, McmcConfig const &config,
                           std::uint64_t seed);

}  // namespace corrbelief
