// Copyright 2026 The AWI Authors. All Rights Reserved.
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
// =============================================================================

// Chat sessions over HTTP.
//
//   POST /api/session               -> 201 {"session_id"}
//   POST /api/session/{id}/message  {"text"} ->
//        200 {"session_id", "reply", "attention", "turn_index",
//             "source_tokens", "reply_tokens"}
//   GET  /api/session/{id}          -> 200 {"session_id", "turn_index",
//                                           "created_at", "last_active",
//                                           "transcript": [{"speaker","text"}]}
//   GET  /health                    -> 200 {"status", "model_loaded",
//                                           "sessions"}
//
// Errors carry {"error": message}: 400 bad request, 404 unknown session,
// 500 generation failure, 503 no model loaded.

#ifndef AWI_SERVICE_H_
#define AWI_SERVICE_H_

#include <chrono>
#include <filesystem>
#include <memory>
#include <mutex>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "awi/inference.h"
#include "awi/model.h"
#include "awi/vocab.h"

namespace awi {

struct ServiceOptions {
  DecodeConfig decode = DecodeConfig::Chat();
  std::chrono::seconds idle_timeout{30 * 60};
};

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

// Transport-independent session registry. Parameters are immutable once
// loaded; each session serializes its own requests.
class ChatService {
 public:
  using Clock = std::chrono::system_clock;

  explicit ChatService(ServiceOptions options = {});
  ~ChatService();

  // May be called once. Until then session endpoints answer 503.
  void load_model(AwiParams params, Vocab vocab);
  bool model_loaded() const;

  ApiResponse health() const;
  ApiResponse create_session();
  ApiResponse post_message(const std::string& session_id,
                           std::string_view request_body);
  ApiResponse get_session(const std::string& session_id) const;

  // Drops sessions idle for longer than the configured timeout.
  std::size_t evict_idle(Clock::time_point now);
  std::size_t session_count() const;

 private:
  struct Model {
    AwiParams params;
    Vocab vocab;
  };
  struct ApiSession;

  std::shared_ptr<const Model> model() const;
  std::shared_ptr<ApiSession> find(const std::string& id) const;
  std::string new_id();

  ServiceOptions options_;
  mutable std::mutex mutex_;
  std::shared_ptr<const Model> model_;
  std::unordered_map<std::string, std::shared_ptr<ApiSession>> sessions_;
  std::mt19937_64 id_rng_;
};

// HTTP front end for a ChatService, optionally serving a static web client.
class HttpServer {
 public:
  explicit HttpServer(ChatService& service,
                      std::filesystem::path static_dir = {});
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds to host:port (port 0 picks a free one) and returns the port.
  int bind(const std::string& host, int port);
  // Serves until stop(). Requires bind().
  void listen();
  // bind() + listen() on a background thread; returns the bound port.
  int start(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace awi

#endif  // AWI_SERVICE_H_
