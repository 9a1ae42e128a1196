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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <gtest/gtest.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "awi/errors.h"
#include "awi/service.h"
#include "test_util.h"

namespace awi {
namespace {

using nlohmann::json;
using testing::dense_random_params;
using testing::tiny_config;

Vocab vocab_of_size(std::size_t n) {
  std::vector<std::string> words;
  for (std::size_t i = kNumSpecials; i < n; ++i) {
    words.push_back("w" + std::to_string(i));
  }
  return Vocab::FromWords(words);
}

std::string message(const std::string& text) {
  return json{{"text", text}}.dump();
}

void load_tiny(ChatService& service) {
  service.load_model(dense_random_params(tiny_config(), 1, 1.0),
                     vocab_of_size(20));
}

ServiceOptions greedy_options() {
  ServiceOptions o;
  o.decode = DecodeConfig{};
  o.decode.max_len = 6;
  return o;
}

TEST(ChatService, UnavailableUntilModelLoaded) {
  ChatService s;
  EXPECT_EQ(s.create_session().status, 503);
  EXPECT_EQ(s.post_message("x", message("hi")).status, 503);
  EXPECT_FALSE(s.health().body["model_loaded"].get<bool>());
  load_tiny(s);
  EXPECT_TRUE(s.model_loaded());
  EXPECT_EQ(s.create_session().status, 201);
  EXPECT_THROW(load_tiny(s), ConfigurationError);
}

TEST(ChatService, ModelAndVocabularyMustAgree) {
  ChatService s;
  EXPECT_THROW(s.load_model(dense_random_params(tiny_config(), 1),
                            vocab_of_size(21)),
               ConfigurationError);
}

TEST(ChatService, SessionIdsAreDistinct) {
  ChatService s;
  load_tiny(s);
  std::set<std::string> ids;
  for (int i = 0; i < 50; ++i) {
    const ApiResponse r = s.create_session();
    ASSERT_EQ(r.status, 201);
    const std::string id = r.body["session_id"];
    EXPECT_EQ(id.size(), 32u);
    ids.insert(id);
  }
  EXPECT_EQ(ids.size(), 50u);
  EXPECT_EQ(s.session_count(), 50u);
}

TEST(ChatService, BadRequests) {
  ChatService s(greedy_options());
  load_tiny(s);
  const std::string id = s.create_session().body["session_id"];
  EXPECT_EQ(s.post_message("nope", message("hi")).status, 404);
  EXPECT_EQ(s.get_session("nope").status, 404);
  EXPECT_EQ(s.post_message(id, message("   ")).status, 400);
  EXPECT_EQ(s.post_message(id, "not json").status, 400);
  EXPECT_EQ(s.post_message(id, R"({"text": 5})").status, 400);
  EXPECT_EQ(s.post_message(id, R"({"message": "hi"})").status, 400);
  EXPECT_EQ(s.post_message(id, "[]").status, 400);
  const ApiResponse r = s.post_message("nope", message("hi"));
  EXPECT_TRUE(r.body.contains("error"));
  // Rejected requests leave the session untouched.
  EXPECT_EQ(s.get_session(id).body["turn_index"], 0);
}

TEST(ChatService, MessageResponseShape) {
  ChatService s(greedy_options());
  load_tiny(s);
  const std::string id = s.create_session().body["session_id"];
  for (int turn = 1; turn <= 3; ++turn) {
    const ApiResponse r = s.post_message(id, message("w4 w5 W6"));
    ASSERT_EQ(r.status, 200);
    EXPECT_EQ(r.body["session_id"], id);
    EXPECT_EQ(r.body["turn_index"], turn);
    EXPECT_EQ(r.body["source_tokens"],
              (json{"w4", "w5", "w6", "</s>"}));
    const json& attention = r.body["attention"];
    ASSERT_EQ(attention.size(), r.body["reply_tokens"].size());
    for (const json& row : attention) {
      ASSERT_EQ(row.size(), 4u);
      double sum = 0.0;
      for (const json& a : row) sum += a.get<double>();
      EXPECT_NEAR(sum, 1.0, 1e-6);
    }
    EXPECT_TRUE(r.body["reply"].is_string());
  }
}

TEST(ChatService, TranscriptAlternatesSpeakers) {
  ChatService s(greedy_options());
  load_tiny(s);
  const std::string id = s.create_session().body["session_id"];
  std::vector<std::string> replies;
  for (const char* text : {"w4", "w5 w6", "w7"}) {
    replies.push_back(s.post_message(id, message(text)).body["reply"]);
  }
  const json t = s.get_session(id).body;
  EXPECT_EQ(t["turn_index"], 3);
  ASSERT_EQ(t["transcript"].size(), 6u);
  const std::vector<std::string> users = {"w4", "w5 w6", "w7"};
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(t["transcript"][2 * i]["speaker"], "user");
    EXPECT_EQ(t["transcript"][2 * i]["text"], users[i]);
    EXPECT_EQ(t["transcript"][2 * i + 1]["speaker"], "agent");
    EXPECT_EQ(t["transcript"][2 * i + 1]["text"], replies[i]);
  }
  EXPECT_LE(t["created_at"].get<double>(), t["last_active"].get<double>());
}

TEST(ChatService, SessionsAreIsolated) {
  ChatService s(greedy_options());
  load_tiny(s);
  // Ten sessions, each fed a different first message, then the same second.
  std::vector<std::string> ids;
  for (int i = 0; i < 10; ++i) {
    ids.push_back(s.create_session().body["session_id"]);
  }
  std::vector<json> mixed;
  for (int i = 0; i < 10; ++i) {
    s.post_message(ids[i], message("w" + std::to_string(4 + i)));
  }
  for (int i = 0; i < 10; ++i) {
    mixed.push_back(s.post_message(ids[i], message("w15 w16")).body);
  }
  // The same exchanges run one session at a time must agree exactly.
  for (int i = 0; i < 10; ++i) {
    ChatService solo(greedy_options());
    load_tiny(solo);
    const std::string id = solo.create_session().body["session_id"];
    solo.post_message(id, message("w" + std::to_string(4 + i)));
    const json r = solo.post_message(id, message("w15 w16")).body;
    EXPECT_EQ(r["reply"], mixed[i]["reply"]);
    EXPECT_EQ(r["attention"], mixed[i]["attention"]);
    EXPECT_EQ(mixed[i]["turn_index"], 2);
  }
  // Different histories lead to different states.
  std::set<std::string> attention;
  for (const json& r : mixed) attention.insert(r["attention"].dump());
  EXPECT_GT(attention.size(), 1u);
}

TEST(ChatService, ConcurrentRequestsToOneSessionAreSerialized) {
  ChatService s(greedy_options());
  load_tiny(s);
  const std::string id = s.create_session().body["session_id"];
  constexpr int kThreads = 4;
  constexpr int kPerThread = 5;
  std::vector<std::vector<int>> seen(kThreads);
  {
    std::vector<std::jthread> pool;
    for (int t = 0; t < kThreads; ++t) {
      pool.emplace_back([&, t] {
        for (int i = 0; i < kPerThread; ++i) {
          const ApiResponse r = s.post_message(id, message("w4 w5"));
          seen[t].push_back(r.body["turn_index"].get<int>());
        }
      });
    }
  }
  std::set<int> all;
  for (const auto& v : seen) all.insert(v.begin(), v.end());
  EXPECT_EQ(all.size(), static_cast<std::size_t>(kThreads * kPerThread));
  EXPECT_EQ(*all.begin(), 1);
  EXPECT_EQ(*all.rbegin(), kThreads * kPerThread);
  const json t = s.get_session(id).body["transcript"];
  ASSERT_EQ(t.size(), 2u * kThreads * kPerThread);
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_EQ(t[i]["speaker"], i % 2 == 0 ? "user" : "agent");
  }
}

TEST(ChatService, IdleSessionsAreEvicted) {
  ServiceOptions o = greedy_options();
  o.idle_timeout = std::chrono::seconds(60);
  ChatService s(o);
  load_tiny(s);
  const std::string id = s.create_session().body["session_id"];
  const auto now = ChatService::Clock::now();
  EXPECT_EQ(s.evict_idle(now + std::chrono::seconds(30)), 0u);
  EXPECT_EQ(s.evict_idle(now + std::chrono::seconds(120)), 1u);
  EXPECT_EQ(s.get_session(id).status, 404);
  EXPECT_EQ(s.session_count(), 0u);
}

class HttpServerTest : public ::testing::Test {
 protected:
  void SetUp() override {
    load_tiny(service_);
    static_dir_ = std::filesystem::temp_directory_path() / "awi_static_test";
    std::filesystem::create_directories(static_dir_);
    std::ofstream(static_dir_ / "index.html") << "<html>awi</html>";
    server_ = std::make_unique<HttpServer>(service_, static_dir_);
    port_ = server_->start("127.0.0.1", 0);
  }
  void TearDown() override {
    server_->stop();
    std::filesystem::remove_all(static_dir_);
  }

  ChatService service_{greedy_options()};
  std::filesystem::path static_dir_;
  std::unique_ptr<HttpServer> server_;
  int port_ = 0;
};

TEST_F(HttpServerTest, EndToEndConversation) {
  httplib::Client cli("127.0.0.1", port_);
  auto health = cli.Get("/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  EXPECT_EQ(json::parse(health->body)["status"], "ok");

  auto created = cli.Post("/api/session", "", "application/json");
  ASSERT_TRUE(created);
  EXPECT_EQ(created->status, 201);
  const std::string id = json::parse(created->body)["session_id"];

  for (int turn = 1; turn <= 2; ++turn) {
    auto r = cli.Post("/api/session/" + id + "/message", message("w4 w9"),
                      "application/json");
    ASSERT_TRUE(r);
    EXPECT_EQ(r->status, 200);
    EXPECT_EQ(r->get_header_value("Content-Type"), "application/json");
    const json body = json::parse(r->body);
    EXPECT_EQ(body["turn_index"], turn);
    for (const json& row : body["attention"]) {
      double sum = 0.0;
      for (const json& a : row) sum += a.get<double>();
      EXPECT_NEAR(sum, 1.0, 1e-6);
    }
  }
  auto info = cli.Get("/api/session/" + id);
  ASSERT_TRUE(info);
  EXPECT_EQ(json::parse(info->body)["transcript"].size(), 4u);
}

TEST_F(HttpServerTest, ErrorStatusesPassThrough) {
  httplib::Client cli("127.0.0.1", port_);
  auto missing = cli.Post("/api/session/abc/message", message("hi"),
                          "application/json");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);
  EXPECT_TRUE(json::parse(missing->body).contains("error"));
  EXPECT_EQ(cli.Get("/api/session/abc")->status, 404);

  const std::string id =
      json::parse(cli.Post("/api/session", "", "application/json")->body)
          ["session_id"];
  auto bad = cli.Post("/api/session/" + id + "/message", "{", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
}

TEST_F(HttpServerTest, ServesStaticClient) {
  httplib::Client cli("127.0.0.1", port_);
  auto page = cli.Get("/index.html");
  ASSERT_TRUE(page);
  EXPECT_EQ(page->status, 200);
  EXPECT_EQ(page->body, "<html>awi</html>");
}

TEST(HttpServer, UnloadedServiceAnswers503) {
  ChatService service;
  HttpServer server(service);
  const int port = server.start("127.0.0.1", 0);
  httplib::Client cli("127.0.0.1", port);
  auto r = cli.Post("/api/session", "", "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 503);
  EXPECT_FALSE(json::parse(cli.Get("/health")->body)["model_loaded"]);
  server.stop();
}

}  // namespace
}  // namespace awi
