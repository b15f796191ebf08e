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
#include "corrbelief/bayes.hpp"

#include "corrbelief/errors.hpp"
#include "corrbelief/random.hpp"
#include "corrbelief/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace corrbelief {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

void require_open_unit(double rho)
{
  if (!(std::abs(rho) < 1.0))
    throw InvalidArgument("likelihood undefined for |rho| >= 1");
}

double summed_log_likelihood(double n, double sxx, double syy, double sxy, double rho)
{
  double const one_minus = 1.0 - rho * rho;
  return -n * kLog2Pi - 0.5 * n * std::log(one_minus) -
         (sxx - 2.0 * rho * sxy + syy) / (2.0 * one_minus);
}

}  // namespace

char const *to_string(Model model) noexcept
{
  switch (model)
  {
  case Model::PriorOnly:
    return "PriorOnly";
  case Model::BayesianInformed:
    return "BayesianInformed";
  case Model::BayesianUniform:
    return "BayesianUniform";
  }
  return "unknown";
}

Model model_from_string(std::string const &text)
{
  for (Model m : kAllModels)
    if (text == to_string(m))
      return m;
  throw ParseError("unknown model '" + text + "'");
}

double PriorSpec::log_density(double rho) const noexcept
{
  if (belief_)
    return belief_->log_pdf(rho);
  if (rho < -1.0 || rho > 1.0)
    return -std::numeric_limits<double>::infinity();
  return -std::numbers::ln2;
}

StandardizedData StandardizedData::from(CorrelationDataset const &dataset)
{
  auto const &pts = dataset.points;
  if (pts.size() < 3)
    throw InvalidArgument("a dataset needs at least 3 points");
  auto const n = static_cast<double>(pts.size());
  double mx = 0.0;
  double my = 0.0;
  for (auto const &p : pts)
  {
    mx += p.x;
    my += p.y;
  }
  mx /= n;
  my /= n;
  double vx = 0.0;
  double vy = 0.0;
  for (auto const &p : pts)
  {
    vx += (p.x - mx) * (p.x - mx);
    vy += (p.y - my) * (p.y - my);
  }
  if (!(vx > 0.0 && vy > 0.0))
    throw InvalidArgument("cannot standardize a zero-variance coordinate");
  double const sx = std::sqrt(vx / n);
  double const sy = std::sqrt(vy / n);

  StandardizedData out;
  out.n = pts.size();
  for (auto const &p : pts)
  {
    double const x = (p.x - mx) / sx;
    double const y = (p.y - my) / sy;
    out.sxx += x * x;
    out.syy += y * y;
    out.sxy += x * y;
  }
  return out;
}

double StandardizedData::log_likelihood(double rho) const
{
  require_open_unit(rho);
  return summed_log_likelihood(static_cast<double>(n), sxx, syy, sxy, rho);
}

double log_likelihood_standardized(std::span<Point const> points, double rho)
{
  require_open_unit(rho);
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (auto const &p : points)
  {
    sxx += p.x * p.x;
    syy += p.y * p.y;
    sxy += p.x * p.y;
  }
  return summed_log_likelihood(static_cast<double>(points.size()), sxx, syy, sxy, rho);
}

double log_likelihood(CorrelationDataset const &dataset, double rho)
{
  return StandardizedData::from(dataset).log_likelihood(rho);
}

RhoGrid posterior_grid(CorrelationDataset const &dataset, PriorSpec const &prior,
                       std::size_t count)
{
  auto const data = StandardizedData::from(dataset);
  auto points = RhoGrid::make_points(count);
  std::vector<double> log_density(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    log_density[i] = prior.log_density(points[i]) + data.log_likelihood(points[i]);
  return RhoGrid::from_log_densities(std::move(points), log_density);
}

PosteriorResult posterior(CorrelationDataset const &dataset, PriorSpec const &prior,
                          McmcConfig const &config, std::uint64_t seed)
{
  if (config.chains == 0 || config.samples_per_chain == 0)
    throw InvalidArgument("posterior sampler needs at least one chain and one sample");
  if (!(config.proposal_width > 0.0))
    throw InvalidArgument("proposal width must be positive");

  auto const data = StandardizedData::from(dataset);
  auto log_target = [&](double rho) {
    if (!(std::abs(rho) < 1.0))
      return -std::numeric_limits<double>::infinity();
    return prior.log_density(rho) + data.log_likelihood(rho);
  };

  std::vector<double> samples;
  samples.reserve(config.chains * config.samples_per_chain);
  std::size_t accepted = 0;
  for (std::size_t c = 0; c < config.chains; ++c)
  {
    Rng rng(derive_seed(seed, c));
    double state = -0.9 + 1.8 * rng.uniform();
    double current = log_target(state);
    // An informed prior can be negligible at the overdispersed start; move
    // to its center so the chain begins at finite density.
    if (!std::isfinite(current) && prior.belief())
    {
      state = std::clamp(prior.belief()->mu(), -0.99, 0.99);
      current = log_target(state);
    }
    std::size_t const total = config.burn_in + config.samples_per_chain;
    for (std::size_t it = 0; it < total; ++it)
    {
      double const candidate = rng.normal(state, config.proposal_width);
      double const proposed = log_target(candidate);
      bool accept = false;
      if (std::isfinite(proposed))
      {
        double const log_ratio = proposed - current;
        accept = log_ratio >= 0.0 || std::log(rng.uniform_open()) < log_ratio;
      }
      if (accept)
      {
        state = candidate;
        current = proposed;
      }
      if (it >= config.burn_in)
      {
        samples.push_back(state);
        accepted += accept ? 1 : 0;
      }
    }
  }

  double const rate = static_cast<double>(accepted) / static_cast<double>(samples.size());
  if (rate < config.min_acceptance)
    throw SamplerFailure("posterior sampler acceptance rate " + std::to_string(rate) +
                         " below guard " + std::to_string(config.min_acceptance));

  auto const ci = central_95(samples);
  double const mean = sample_mean(samples);
  Model const model = prior.is_uniform() ? Model::BayesianUniform : Model::BayesianInformed;
  return PosteriorResult{model,       std::move(samples), mean, Interval{ci.lower, ci.upper},
                         posterior_grid(dataset, prior), config, rate};
}

PosteriorResult prior_only(BoundedNormalBelief const &prior, McmcConfig const &config,
                           std::uint64_t seed)
{
  auto samples = prior.sample(seed, config.chains * config.samples_per_chain);
  return PosteriorResult{Model::PriorOnly,
                         std::move(samples),
                         prior.mean(),
                         prior.central_interval(0.95),
                         RhoGrid::from_belief(prior),
                         config,
                         1.0};
}

}  // namespace corrbelief
