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

#include "awi/service.h"

#include <cstdio>
#include <thread>

#include <httplib.h>

#include "awi/corpus.h"
#include "awi/errors.h"

namespace awi {
namespace {

using nlohmann::json;

ApiResponse error_response(int status, std::string message) {
  return {status, json{{"error", std::move(message)}}};
}

double epoch_seconds(ChatService::Clock::time_point t) {
  return std::chrono::duration<double>(t.time_since_epoch()).count();
}

}  // namespace

struct ChatService::ApiSession {
  ApiSession(std::string session_id, const Vocab& vocab, std::size_t hidden,
             DecodeConfig decode, Clock::time_point now)
      : id(std::move(session_id)),
        session(vocab, hidden, decode),
        created_at(now),
        last_active(now) {}

  const std::string id;
  // Guards everything below.
  mutable std::mutex mutex;
  Session session;
  Clock::time_point created_at;
  Clock::time_point last_active;
  std::vector<std::pair<std::string, std::string>> transcript;
};

ChatService::ChatService(ServiceOptions options)
    : options_(options), id_rng_(std::random_device{}()) {}

ChatService::~ChatService() = default;

void ChatService::load_model(AwiParams params, Vocab vocab) {
  if (vocab.size() != params.config().vocab_size) {
    throw ConfigurationError("model and vocabulary sizes differ");
  }
  auto m = std::make_shared<const Model>(Model{std::move(params),
                                               std::move(vocab)});
  std::lock_guard lock(mutex_);
  if (model_) throw ConfigurationError("model already loaded");
  model_ = std::move(m);
}

bool ChatService::model_loaded() const { return model() != nullptr; }

std::shared_ptr<const ChatService::Model> ChatService::model() const {
  std::lock_guard lock(mutex_);
  return model_;
}

std::shared_ptr<ChatService::ApiSession> ChatService::find(
    const std::string& id) const {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

std::string ChatService::new_id() {
  // Caller holds mutex_.
  for (;;) {
    char buf[33];
    std::snprintf(buf, sizeof(buf), "%016llx%016llx",
                  static_cast<unsigned long long>(id_rng_()),
                  static_cast<unsigned long long>(id_rng_()));
    std::string id(buf);
    if (!sessions_.contains(id)) return id;
  }
}

ApiResponse ChatService::health() const {
  std::lock_guard lock(mutex_);
  return {200, json{{"status", "ok"},
                    {"model_loaded", model_ != nullptr},
                    {"sessions", sessions_.size()}}};
}

ApiResponse ChatService::create_session() {
  const auto m = model();
  if (!m) return error_response(503, "model not loaded");
  const auto now = Clock::now();
  evict_idle(now);
  std::lock_guard lock(mutex_);
  std::string id = new_id();
  sessions_.emplace(id, std::make_shared<ApiSession>(
                            id, m->vocab, m->params.config().hidden,
                            options_.decode, now));
  return {201, json{{"session_id", id}}};
}

ApiResponse ChatService::post_message(const std::string& session_id,
                                      std::string_view request_body) {
  const auto m = model();
  if (!m) return error_response(503, "model not loaded");
  const auto s = find(session_id);
  if (!s) return error_response(404, "unknown session " + session_id);

  json request;
  try {
    request = json::parse(request_body);
  } catch (const json::exception&) {
    return error_response(400, "request body is not JSON");
  }
  if (!request.is_object() || !request.contains("text") ||
      !request["text"].is_string()) {
    return error_response(400, "request needs a string field 'text'");
  }
  const std::string text = request["text"].get<std::string>();
  if (tokenize(text).empty()) return error_response(400, "empty text");

  std::lock_guard lock(s->mutex);
  Reply reply;
  try {
    reply = respond(s->session, m->params, text);
  } catch (const std::exception& e) {
    return error_response(500, std::string("generation failed: ") + e.what());
  }
  s->transcript.emplace_back("user", text);
  s->transcript.emplace_back("agent", reply.text);
  s->last_active = Clock::now();
  return {200, json{{"session_id", s->id},
                    {"reply", reply.text},
                    {"attention", reply.attention},
                    {"turn_index", s->session.turn_index()},
                    {"source_tokens", reply.source_tokens},
                    {"reply_tokens", reply.reply_tokens}}};
}

ApiResponse ChatService::get_session(const std::string& session_id) const {
  const auto s = find(session_id);
  if (!s) return error_response(404, "unknown session " + session_id);
  std::lock_guard lock(s->mutex);
  json transcript = json::array();
  for (const auto& [speaker, text] : s->transcript) {
    transcript.push_back({{"speaker", speaker}, {"text", text}});
  }
  return {200, json{{"session_id", s->id},
                    {"turn_index", s->session.turn_index()},
                    {"created_at", epoch_seconds(s->created_at)},
                    {"last_active", epoch_seconds(s->last_active)},
                    {"transcript", std::move(transcript)}}};
}

std::size_t ChatService::evict_idle(Clock::time_point now) {
  std::lock_guard lock(mutex_);
  std::size_t dropped = 0;
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    Clock::time_point last;
    {
      std::lock_guard session_lock(it->second->mutex);
      last = it->second->last_active;
    }
    if (now - last > options_.idle_timeout) {
      it = sessions_.erase(it);
      ++dropped;
    } else {
      ++it;
    }
  }
  return dropped;
}

std::size_t ChatService::session_count() const {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

struct HttpServer::Impl {
  ChatService& service;
  httplib::Server server;
  std::thread thread;
  bool bound = false;

  explicit Impl(ChatService& s) : service(s) {}
};

namespace {

void reply_with(httplib::Response& res, const ApiResponse& r) {
  res.status = r.status;
  res.set_content(r.body.dump(), "application/json");
}

}  // namespace

HttpServer::HttpServer(ChatService& service, std::filesystem::path static_dir)
    : impl_(std::make_unique<Impl>(service)) {
  auto& srv = impl_->server;
  ChatService& svc = service;
  srv.Post("/api/session", [&svc](const httplib::Request&,
                                  httplib::Response& res) {
    reply_with(res, svc.create_session());
  });
  srv.Post(R"(/api/session/([^/]+)/message)",
           [&svc](const httplib::Request& req, httplib::Response& res) {
             reply_with(res, svc.post_message(req.matches[1], req.body));
           });
  srv.Get(R"(/api/session/([^/]+))",
          [&svc](const httplib::Request& req, httplib::Response& res) {
            reply_with(res, svc.get_session(req.matches[1]));
          });
  srv.Get("/health", [&svc](const httplib::Request&, httplib::Response& res) {
    reply_with(res, svc.health());
  });
  if (!static_dir.empty()) srv.set_mount_point("/", static_dir.string());
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  int bound_port = port;
  if (port == 0) {
    bound_port = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound_port = -1;
  }
  if (bound_port < 0) {
    throw Error("cannot bind " + host + ":" + std::to_string(port));
  }
  impl_->bound = true;
  return bound_port;
}

void HttpServer::listen() {
  if (!impl_->bound) throw Error("HttpServer::listen before bind");
  impl_->server.listen_after_bind();
}

int HttpServer::start(const std::string& host, int port) {
  const int bound_port = bind(host, port);
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound_port;
}

void HttpServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace awi
