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

#ifndef AWI_VOCAB_H_
#define AWI_VOCAB_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace awi {

using TokenId = std::int32_t;

inline constexpr TokenId kPad = 0;
inline constexpr TokenId kBos = 1;
inline constexpr TokenId kEos = 2;
inline constexpr TokenId kUnk = 3;
inline constexpr std::size_t kNumSpecials = 4;

inline constexpr std::string_view kPadToken = "<pad>";
inline constexpr std::string_view kBosToken = "<s>";
inline constexpr std::string_view kEosToken = "</s>";
inline constexpr std::string_view kUnkToken = "<unk>";

inline bool is_special(TokenId id) {
  return id >= 0 && static_cast<std::size_t>(id) < kNumSpecials;
}

// Bijective token <-> id map shared by both sides of the conversation.
// Ids 0..3 are always <pad>, <s>, </s>, <unk>.
class Vocab {
 public:
  // Specials only.
  Vocab();

  // Specials followed by `words` in the given order. Throws FormatError on
  // duplicates or on a word that collides with a special.
  static Vocab FromWords(const std::vector<std::string>& words);

  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  std::optional<TokenId> find(std::string_view token) const;
  // Id of `token`, or <unk>.
  TokenId id(std::string_view token) const;
  // Throws VocabularyError for an id outside [0, size).
  const std::string& token(TokenId id) const;

  friend bool operator==(const Vocab& a, const Vocab& b) {
    return a.tokens_ == b.tokens_;
  }

 private:
  void add(std::string token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
};

}  // namespace awi

#endif  // AWI_VOCAB_H_
