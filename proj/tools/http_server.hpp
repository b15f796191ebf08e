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

// HTTP transport for the session service. Requests are passed verbatim to
// cb_service_handle; this layer only moves bytes.

#include "corrbelief/corrbelief.h"

#include "httplib.h"

#include <string>

namespace corrbelief::tools {

class HttpServer
{
public:
  explicit HttpServer(cb_service *service)
    : service_(service)
  {
    auto handler = [this](httplib::Request const &req, httplib::Response &res) {
      forward(req, res);
    };
    server_.Get(".*", handler);
    server_.Post(".*", handler);
    server_.Options(".*", [](httplib::Request const &, httplib::Response &res) {
      allow_cross_origin(res);
      res.status = 204;
    });
  }

  /// Binds without serving. Port 0 picks a free port; returns the bound port
  /// or -1.
  int bind(std::string const &host, int port)
  {
    if (port == 0)
      return server_.bind_to_any_port(host);
    return server_.bind_to_port(host, port) ? port : -1;
  }

  /// Blocks until stop() is called.
  bool serve() { return server_.listen_after_bind(); }
  void stop() { server_.stop(); }
  void wait_until_ready() const { server_.wait_until_ready(); }

private:
  static void allow_cross_origin(httplib::Response &res)
  {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
  }

  void forward(httplib::Request const &req, httplib::Response &res)
  {
    int status = 500;
    char *body = nullptr;
    if (cb_service_handle(service_, req.method.c_str(), req.path.c_str(), req.body.c_str(),
                          &status, &body) != CB_OK)
    {
      res.status = 500;
      res.set_content(std::string(R"({"error":{"code":"internal","message":"request failed"}})"),
                      "application/json");
      return;
    }
    res.status = status;
    res.set_content(body, "application/json");
    cb_string_free(body);
    allow_cross_origin(res);
  }

  cb_service *service_;
  httplib::Server server_;
};

}  // namespace corrbelief::tools
