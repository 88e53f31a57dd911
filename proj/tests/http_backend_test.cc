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

#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "judgetune/annotation.h"
#include "judgetune/backend.h"
#include "judgetune/errors.h"

namespace judgetune {
namespace {

using json = nlohmann::json;

// Minimal OpenAI-compatible server on a random local port.
class FakeServer {
 public:
  FakeServer() {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                httplib::Response& res) {
      ++requests_;
      last_auth_ = req.get_header_value("Authorization");
      if (failures_left_ > 0) {
        --failures_left_;
        res.status = 503;
        return;
      }
      const json body = json::parse(req.body);
      last_model_ = body["model"].get<std::string>();
      last_temperature_ = body["temperature"].get<double>();
      const json reply = {
          {"choices", {{{"message", {{"role", "assistant"}, {"content", content_}}}}}},
          {"usage", {{"prompt_tokens", 11}, {"completion_tokens", 7}}}};
      res.set_content(reply.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeServer() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> requests_{0};
  std::atomic<int> failures_left_{0};
  std::string content_ = "{\"score_A\": 3, \"score_B\": 9}";
  std::string last_auth_;
  std::string last_model_;
  double last_temperature_ = -1;
};

TEST(HttpBackendTest, CompletesAgainstLocalServer) {
  FakeServer server;
  ::setenv("JUDGETUNE_TEST_KEY", "secret", 1);
  HttpChatBackend backend({server.url(), "JUDGETUNE_TEST_KEY", 5.0, 2, 32});
  ChatRequest req;
  req.model = "served-model";
  req.prompt = "hello";
  req.temperature = 0.1;
  const ChatResponse r = backend.Complete(req);
  EXPECT_EQ(r.content, server.content_);
  EXPECT_EQ(r.prompt_tokens, 11);
  EXPECT_EQ(r.completion_tokens, 7);
  EXPECT_EQ(server.last_auth_, "Bearer secret");
  EXPECT_EQ(server.last_model_, "served-model");
  EXPECT_EQ(server.last_temperature_, 0.1);
}

TEST(HttpBackendTest, ErrorsBecomeTransportErrorsAndAreRetried) {
  FakeServer server;
  server.failures_left_ = 2;
  HttpChatBackend backend({server.url(), "", 5.0, 1, 0});
  EXPECT_THROW(backend.Complete({}), TransportError);

  EngineOptions o;
  o.backoff_initial = std::chrono::milliseconds(1);
  AnnotationEngine engine(backend, DefaultSearchSpace(), DefaultPriceTable(), o);
  Battle b{"x", "q", "a", "b", 1.0, std::nullopt, std::nullopt};
  const JudgeConfig config{"qwen2.5-7b", 0.0, false, {OutputType::kPair, false, false, false, true}};
  const Annotation a = engine.Annotate(config, b);
  EXPECT_EQ(a.status, AnnotationStatus::kOk);
  EXPECT_EQ(a.prompt_tokens, 11);
  EXPECT_EQ(engine.backend_calls(), 2u);
}

TEST(HttpBackendTest, UnreachableAndBadConfig) {
  HttpChatBackend dead({"http://127.0.0.1:1", "", 0.5, 1, 0});
  EXPECT_THROW(dead.Complete({}), TransportError);
  EXPECT_THROW(HttpChatBackend({"localhost:8000", "", 1.0, 1, 0}), ConfigError);
  EXPECT_THROW(HttpChatBackend({"ftp://x", "", 1.0, 1, 0}), ConfigError);
  ::unsetenv("JUDGETUNE_MISSING_KEY");
  EXPECT_THROW(HttpChatBackend({"http://x", "JUDGETUNE_MISSING_KEY", 1.0, 1, 0}), ConfigError);
}

}  // namespace
}  // namespace judgetune
