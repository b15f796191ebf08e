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
#include <span>
#include <vector>

namespace corrbelief {

double sample_mean(std::span<double const> values);

/// Linear-interpolation quantile of already sorted values (the common
/// "type 7" definition). Requires a nonempty input and p in [0, 1].
double sorted_quantile(std::span<double const> sorted, double p);

/// Sorts a copy and returns the 2.5% / 97.5% quantiles.
struct QuantilePair
{
  double lower;
  double upper;
};
QuantilePair central_95(std::span<double const> values);

double median(std::vector<double> values);

}  // namespace corrbelief
