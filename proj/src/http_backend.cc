// Copyright 2026 The judgetune Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <chrono>
#include <cstdlib>
#include <semaphore>

#include "httplib.h"
#include "json.hpp"
#include "judgetune/backend.h"
#include "judgetune/errors.h"

namespace judgetune {

using json = nlohmann::json;

struct HttpChatBackend::Impl {
  explicit Impl(HttpEndpointParams p)
      : params(std::move(p)), slots(std::max(1, params.max_parallel)) {}

  HttpEndpointParams params;
  std::string scheme_host_port;
  std::string path_prefix;
  std::string api_key;
  std::counting_semaphore<1024> slots;
};

HttpChatBackend::HttpChatBackend(HttpEndpointParams params)
    : impl_(std::make_unique<Impl>(std::move(params))) {
  const std::string& url = impl_->params.base_url;
  const size_t scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("backend base_url needs a scheme: " + url);
  }
  const std::string scheme = url.substr(0, scheme_end);
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (scheme == "https") {
    throw ConfigError("https endpoints need a build with OpenSSL support");
  }
#endif
  if (scheme != "http" && scheme != "https") {
    throw ConfigError("unsupported URL scheme: " + scheme);
  }
  const size_t path_start = url.find('/', scheme_end + 3);
  impl_->scheme_host_port = url.substr(0, path_start);
  if (path_start != std::string::npos) {
    impl_->path_prefix = url.substr(path_start);
    while (!impl_->path_prefix.empty() && impl_->path_prefix.back() == '/') {
      impl_->path_prefix.pop_back();
    }
  }
  if (!impl_->params.api_key_env.empty()) {
    const char* key = std::getenv(impl_->params.api_key_env.c_str());
    if (key == nullptr) {
      throw ConfigError("environment variable " + impl_->params.api_key_env +
                        " is not set");
    }
    impl_->api_key = key;
  }
}

HttpChatBackend::~HttpChatBackend() = default;

ChatResponse HttpChatBackend::Complete(const ChatRequest& request) {
  json body = {
      {"model", request.model},
      {"messages", json::array({{{"role", "user"}, {"content", request.prompt}}})},
      {"temperature", request.temperature},
  };
  if (impl_->params.max_tokens > 0) body["max_tokens"] = impl_->params.max_tokens;

  httplib::Result res;
  {
    impl_->slots.acquire();
    struct Release {
      std::counting_semaphore<1024>& slots;
      ~Release() { slots.release(); }
    } release{impl_->slots};
    httplib::Client client(impl_->scheme_host_port);
    const auto timeout = std::chrono::duration<double>(impl_->params.timeout_s);
    client.set_connection_timeout(
        std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    client.set_read_timeout(
        std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    if (!impl_->api_key.empty()) client.set_bearer_token_auth(impl_->api_key);
    res = client.Post(impl_->path_prefix + "/chat/completions", body.dump(),
                      "application/json");
  }

  if (!res) {
    throw TransportError("request to " + impl_->params.base_url +
                         " failed: " + httplib::to_string(res.error()));
  }
  if (res->status < 200 || res->status >= 300) {
    throw TransportError("backend returned HTTP " + std::to_string(res->status));
  }
  const json reply = json::parse(res->body, nullptr, /*allow_exceptions=*/false);
  if (!reply.is_object() || !reply.contains("choices") ||
      !reply["choices"].is_array() || reply["choices"].empty()) {
    throw TransportError("backend reply has no choices");
  }
  const json& message = reply["choices"][0].value("message", json::object());
  ChatResponse out;
  if (message.contains("content") && message["content"].is_string()) {
    out.content = message["content"].get<std::string>();
  }
  if (reply.contains("usage") && reply["usage"].is_object()) {
    out.prompt_tokens = reply["usage"].value("prompt_tokens", int64_t{0});
    out.completion_tokens = reply["usage"].value("completion_tokens", int64_t{0});
  }
  return out;
}

}  // namespace judgetune
