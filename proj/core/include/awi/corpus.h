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

// Dialogue corpora.
//
// On disk a corpus is JSON Lines, one dialogue per line:
//
//   {"id": "d1", "turns": [{"user": "hi", "agent": "how may i help you ?"}]}

#ifndef AWI_CORPUS_H_
#define AWI_CORPUS_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "awi/model.h"
#include "awi/vocab.h"

namespace awi {

struct Turn {
  std::string user;
  std::string agent;
  friend bool operator==(const Turn&, const Turn&) = default;
};

struct Dialogue {
  std::string id;
  std::vector<Turn> turns;
  friend bool operator==(const Dialogue&, const Dialogue&) = default;
};

// Lowercased whitespace-separated tokens.
std::vector<std::string> tokenize(std::string_view text);
// tokenize() joined by single spaces.
std::string normalize(std::string_view text);

// Parses one corpus line. `line_number` only labels errors.
Dialogue parse_dialogue(std::string_view line, std::size_t line_number = 0);
std::string format_dialogue(const Dialogue& dialogue);

// Blank lines are skipped. Throws FormatError naming the offending line, or
// DomainError if the file holds no dialogues.
std::vector<Dialogue> read_dialogues(std::istream& in);
std::vector<Dialogue> load_dialogues(const std::filesystem::path& path);

void write_dialogues(std::ostream& out, const std::vector<Dialogue>& dialogues);
void save_dialogues(const std::filesystem::path& path,
                    const std::vector<Dialogue>& dialogues);

// Tokens from both sides with count >= min_count, by descending count then
// ascending token, after the four specials.
Vocab build_vocab(const std::vector<Dialogue>& dialogues, int min_count = 1);

// Token ids of normalize(text) followed by </s>; unknown tokens map to <unk>.
std::vector<TokenId> encode(std::string_view text, const Vocab& vocab);
// Space-joined tokens with special ids dropped.
std::string decode(std::span<const TokenId> ids, const Vocab& vocab);

EncodedDialogue encode_dialogue(const Dialogue& dialogue, const Vocab& vocab);
std::vector<EncodedDialogue> encode_dialogues(
    const std::vector<Dialogue>& dialogues, const Vocab& vocab);

// Synthetic three-turn help-desk dialogues in which the final agent reply
// repeats the color named in the first user turn.
namespace synthetic {

inline constexpr std::array<std::string_view, 8> kColors = {
    "red", "blue", "green", "yellow", "black", "white", "orange", "purple"};
inline constexpr std::array<std::string_view, 4> kFillers = {
    "yes", "ok", "sure", "yes it does"};
inline constexpr std::string_view kClarify =
    "can you tell me when the error appears ?";
inline constexpr std::string_view kOffer = "i can help you fix that today .";
inline constexpr std::string_view kQuestion = "which error was it";

std::string problem(std::string_view color);  // "my device shows a <C> error"
std::string answer(std::string_view color);   // "it was the <C> error"

// Deterministic for a given (seed, n).
std::vector<Dialogue> generate(std::uint64_t seed, std::size_t n);

// The color of the first user turn, or "" if none.
std::string first_color(const Dialogue& dialogue);
// The first color word in `text`, or "" if none.
std::string find_color(std::string_view text);

}  // namespace synthetic

inline std::vector<Dialogue> synthetic_generate(std::uint64_t seed,
                                                std::size_t n) {
  return synthetic::generate(seed, n);
}

}  // namespace awi

#endif  // AWI_CORPUS_H_
