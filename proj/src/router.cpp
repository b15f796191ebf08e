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
#include "corrbelief/router.hpp"

#include "corrbelief/errors.hpp"

#include <vector>

namespace corrbelief {

namespace {

std::vector<std::string> split_path(std::string_view path)
{
  if (auto q = path.find('?'); q != std::string_view::npos)
    path = path.substr(0, q);
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= path.size())
  {
    auto const end = std::min(path.find('/', start), path.size());
    if (end > start)
      parts.emplace_back(path.substr(start, end - start));
    start = end + 1;
  }
  return parts;
}

Json request_body(std::string_view body)
{
  if (body.find_first_not_of(" \t\r\n") == std::string_view::npos)
    return Json::object();
  Json parsed = parse_json(std::string(body));
  if (!parsed.is_object())
    throw ParseError("request body must be a JSON object");
  return parsed;
}

ApiResponse ok(Json const &body, int status = 200)
{
  return {status, body.dump()};
}

}  // namespace

int http_status_for(std::exception const &error) noexcept
{
  if (dynamic_cast<InvalidArgument const *>(&error) || dynamic_cast<ParseError const *>(&error))
    return 400;
  if (dynamic_cast<NotFound const *>(&error))
    return 404;
  if (dynamic_cast<StateError const *>(&error))
    return 409;
  return 500;
}

char const *error_code_for(std::exception const &error) noexcept
{
  if (dynamic_cast<InvalidArgument const *>(&error))
    return "invalid_argument";
  if (dynamic_cast<ParseError const *>(&error))
    return "parse_error";
  if (dynamic_cast<NotFound const *>(&error))
    return "not_found";
  if (dynamic_cast<StateError const *>(&error))
    return "state_error";
  if (dynamic_cast<SamplerFailure const *>(&error))
    return "sampler_failure";
  if (dynamic_cast<IoError const *>(&error))
    return "io_error";
  return "internal";
}

ApiResponse ApiRouter::handle(std::string_view method, std::string_view path,
                              std::string_view body) const
{
  try
  {
    auto const p = split_path(path);
    bool const get = method == "GET";
    bool const post = method == "POST";
    auto route = [&](std::initializer_list<char const *> shape) {
      if (shape.size() != p.size())
        return false;
      std::size_t i = 0;
      for (char const *part : shape)
      {
        if (part[0] != '{' && p[i] != part)
          return false;
        ++i;
      }
      return true;
    };

    if (post && route({"sessions"}))
      return ok(service_.create_session(request_body(body)), 201);
    if (get && route({"sessions", "{id}"}))
      return ok(service_.session(p[1]));
    if (get && route({"sessions", "{id}", "current-trial"}))
      return ok(service_.current_trial(p[1]));
    if (get && route({"sessions", "{id}", "exclusions"}))
      return ok(service_.exclusions(p[1]));
    if (post && route({"sessions", "{id}", "trials", "{tid}", "prior"}))
      return ok(service_.submit_prior(p[1], p[3], request_body(body)));
    if (post && route({"sessions", "{id}", "trials", "{tid}", "view-ack"}))
      return ok(service_.acknowledge_view(p[1], p[3], request_body(body)));
    if (post && route({"sessions", "{id}", "trials", "{tid}", "posterior"}))
      return ok(service_.submit_posterior(p[1], p[3], request_body(body)));
    if (post && route({"sessions", "{id}", "mcmcp", "{chain}", "choice"}))
      return ok(service_.submit_choice(p[1], p[3], request_body(body)));
    if (post && route({"sessions", "{id}", "attention", "{item}"}))
      return ok(service_.submit_attention(p[1], p[3], request_body(body)));
    if (get && route({"studies"}))
      return ok(Json{{"studies", service_.study_ids()}});
    if (get && route({"studies", "{id}"}))
      return ok(study_config_to_json(service_.study(p[1])));
    if (get && route({"studies", "{id}", "export"}))
    {
      auto const bundle = service_.export_study(p[1]);
      Json files = Json::object();
      for (auto const &[name, content] : bundle.files)
        files[name] = content;
      return ok(Json{{"study_id", bundle.study_id},
                     {"sessions", bundle.sessions},
                     {"sealed_sessions", bundle.sealed_sessions},
                     {"files", std::move(files)}});
    }
    throw NotFound(std::string(method) + " " + std::string(path) + " is not a route");
  }
  catch (std::exception const &error)
  {
    Json const body{{"error", {{"code", error_code_for(error)}, {"message", error.what()}}}};
    return {http_status_for(error), body.dump()};
  }
}

}  // namespace corrbelief
