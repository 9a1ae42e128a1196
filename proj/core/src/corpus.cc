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

#include "awi/corpus.h"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <random>

#include <nlohmann/json.hpp>

#include "awi/errors.h"

namespace awi {
namespace {

using nlohmann::json;

bool is_space(char ch) {
  return ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r' || ch == '\f' ||
         ch == '\v';
}

char ascii_lower(char ch) {
  return (ch >= 'A' && ch <= 'Z') ? static_cast<char>(ch - 'A' + 'a') : ch;
}

std::string where(std::size_t line_number) {
  return line_number > 0 ? "line " + std::to_string(line_number) + ": "
                         : std::string();
}

std::string required_text(const json& obj, const char* key,
                          std::size_t line_number, std::size_t turn) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw FormatError(where(line_number) + "turn " + std::to_string(turn) +
                      " has no string field '" + key + "'");
  }
  std::string text = it->get<std::string>();
  if (tokenize(text).empty()) {
    throw FormatError(where(line_number) + "turn " + std::to_string(turn) +
                      " has empty '" + key + "' text");
  }
  return text;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    if (is_space(ch)) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(ascii_lower(ch));
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::string normalize(std::string_view text) {
  std::string out;
  for (const std::string& tok : tokenize(text)) {
    if (!out.empty()) out.push_back(' ');
    out += tok;
  }
  return out;
}

Dialogue parse_dialogue(std::string_view line, std::size_t line_number) {
  json record;
  try {
    record = json::parse(line);
  } catch (const json::parse_error& e) {
    throw FormatError(where(line_number) + "invalid JSON: " + e.what());
  }
  if (!record.is_object()) {
    throw FormatError(where(line_number) + "record is not an object");
  }
  Dialogue d;
  auto id = record.find("id");
  if (id == record.end() || !id->is_string()) {
    throw FormatError(where(line_number) + "missing string field 'id'");
  }
  d.id = id->get<std::string>();
  auto turns = record.find("turns");
  if (turns == record.end() || !turns->is_array()) {
    throw FormatError(where(line_number) + "missing array field 'turns'");
  }
  if (turns->empty()) {
    throw FormatError(where(line_number) + "dialogue has no turns");
  }
  for (std::size_t i = 0; i < turns->size(); ++i) {
    const json& t = (*turns)[i];
    if (!t.is_object()) {
      throw FormatError(where(line_number) + "turn " + std::to_string(i) +
                        " is not an object");
    }
    d.turns.push_back({required_text(t, "user", line_number, i),
                       required_text(t, "agent", line_number, i)});
  }
  return d;
}

std::string format_dialogue(const Dialogue& dialogue) {
  json turns = json::array();
  for (const Turn& t : dialogue.turns) {
    turns.push_back({{"user", t.user}, {"agent", t.agent}});
  }
  return json{{"id", dialogue.id}, {"turns", std::move(turns)}}.dump();
}

std::vector<Dialogue> read_dialogues(std::istream& in) {
  std::vector<Dialogue> out;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (tokenize(line).empty()) continue;
    out.push_back(parse_dialogue(line, line_number));
  }
  if (out.empty()) throw DomainError("corpus holds no dialogues");
  return out;
}

std::vector<Dialogue> load_dialogues(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open corpus " + path.string());
  return read_dialogues(in);
}

void write_dialogues(std::ostream& out, const std::vector<Dialogue>& dialogues) {
  for (const Dialogue& d : dialogues) out << format_dialogue(d) << '\n';
}

void save_dialogues(const std::filesystem::path& path,
                    const std::vector<Dialogue>& dialogues) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot write corpus " + path.string());
  write_dialogues(out, dialogues);
  if (!out) throw DomainError("failed writing corpus " + path.string());
}

Vocab build_vocab(const std::vector<Dialogue>& dialogues, int min_count) {
  if (dialogues.empty()) throw DomainError("build_vocab: no dialogues");
  if (min_count < 1) throw DomainError("build_vocab: min_count must be >= 1");
  std::map<std::string, long> counts;
  for (const Dialogue& d : dialogues) {
    for (const Turn& t : d.turns) {
      for (auto& tok : tokenize(t.user)) ++counts[tok];
      for (auto& tok : tokenize(t.agent)) ++counts[tok];
    }
  }
  std::vector<std::pair<std::string, long>> kept;
  for (auto& [tok, n] : counts) {
    if (n < min_count) continue;
    // Corpus text that spells a special token is treated as <unk>.
    if (tok == kPadToken || tok == kBosToken || tok == kEosToken ||
        tok == kUnkToken) {
      continue;
    }
    kept.emplace_back(tok, n);
  }
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> words;
  words.reserve(kept.size());
  for (auto& [tok, n] : kept) words.push_back(tok);
  return Vocab::FromWords(words);
}

std::vector<TokenId> encode(std::string_view text, const Vocab& vocab) {
  std::vector<TokenId> ids;
  for (const std::string& tok : tokenize(text)) ids.push_back(vocab.id(tok));
  ids.push_back(kEos);
  return ids;
}

std::string decode(std::span<const TokenId> ids, const Vocab& vocab) {
  std::string out;
  for (TokenId id : ids) {
    if (is_special(id)) continue;
    if (!out.empty()) out.push_back(' ');
    out += vocab.token(id);
  }
  return out;
}

EncodedDialogue encode_dialogue(const Dialogue& dialogue, const Vocab& vocab) {
  EncodedDialogue out;
  out.reserve(dialogue.turns.size());
  for (const Turn& t : dialogue.turns) {
    out.push_back({encode(t.user, vocab), encode(t.agent, vocab)});
  }
  return out;
}

std::vector<EncodedDialogue> encode_dialogues(
    const std::vector<Dialogue>& dialogues, const Vocab& vocab) {
  std::vector<EncodedDialogue> out;
  out.reserve(dialogues.size());
  for (const Dialogue& d : dialogues) out.push_back(encode_dialogue(d, vocab));
  return out;
}

namespace synthetic {

std::string problem(std::string_view color) {
  return "my device shows a " + std::string(color) + " error";
}

std::string answer(std::string_view color) {
  return "it was the " + std::string(color) + " error";
}

std::vector<Dialogue> generate(std::uint64_t seed, std::size_t n) {
  if (n == 0) throw DomainError("synthetic corpus size must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick_color(0, kColors.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_filler(0,
                                                         kFillers.size() - 1);
  std::vector<Dialogue> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string_view color = kColors[pick_color(rng)];
    const std::string_view filler = kFillers[pick_filler(rng)];
    Dialogue d;
    d.id = "synth-" + std::to_string(seed) + "-" + std::to_string(i);
    d.turns.push_back({problem(color), std::string(kClarify)});
    d.turns.push_back({std::string(filler), std::string(kOffer)});
    d.turns.push_back({std::string(kQuestion), answer(color)});
    out.push_back(std::move(d));
  }
  return out;
}

std::string find_color(std::string_view text) {
  for (const std::string& tok : tokenize(text)) {
    if (std::find(kColors.begin(), kColors.end(), tok) != kColors.end()) {
      return tok;
    }
  }
  return {};
}

std::string first_color(const Dialogue& dialogue) {
  if (dialogue.turns.empty()) return {};
  return find_color(dialogue.turns.front().user);
}

}  // namespace synthetic
}  // namespace awi
