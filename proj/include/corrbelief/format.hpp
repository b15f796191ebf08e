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

#include <string>

namespace corrbelief {

/// Shortest round-trip decimal form of a double ("nan"/"inf" for
/// non-finite values). Used for CSV output so files are byte-stable.
std::string format_double(double value);

/// Quotes a CSV field when it contains a separator, quote or newline.
std::string csv_field(std::string const &text);

}  // namespace corrbelief
