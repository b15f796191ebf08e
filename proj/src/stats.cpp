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
#include "corrbelief/stats.hpp"

#include "corrbelief/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace corrbelief {

double sample_mean(std::span<double const> values)
{
  if (values.empty())
    throw InvalidArgument("mean of an empty sample");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double sorted_quantile(std::span<double const> sorted, double p)
{
  if (sorted.empty())
    throw InvalidArgument("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0))
    throw InvalidArgument("quantile level must lie in [0, 1]");
  double const h = p * static_cast<double>(sorted.size() - 1);
  auto const lo = static_cast<std::size_t>(std::floor(h));
  auto const hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

QuantilePair central_95(std::span<double const> values)
{
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return {sorted_quantile(sorted, 0.025), sorted_quantile(sorted, 0.975)};
}

double median(std::vector<double> values)
{
  std::sort(values.begin(), values.end());
  return sorted_quantile(values, 0.5);
}

}  // namespace corrbelief
