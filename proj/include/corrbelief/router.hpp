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

#include "corrbelief/service.hpp"

#include <string>
#include <string_view>

namespace corrbelief {

struct ApiResponse
{
  int status = 200;
  /// JSON text. Errors have the shape {"error": {"code", "message"}}.
  std::string body;
};

/// Transport-independent HTTP+JSON routing over a SessionService. The HTTP
/// server, the C API and in-process simulations all go through `handle`.
class ApiRouter
{
public:
  explicit ApiRouter(SessionService &service)
    : service_(service)
  {}

  /// `path` may carry a query string, which is ignored.
  ApiResponse handle(std::string_view method, std::string_view path,
                     std::string_view body) const;

private:
  SessionService &service_;
};

/// HTTP status for an exception thrown by the core: 400 invalid input,
/// 404 unknown resource, 409 wrong state, 500 otherwise.
int http_status_for(std::exception const &error) noexcept;
char const *error_code_for(std::exception const &error) noexcept;

}  // namespace corrbelief
