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

#include "awi/vocab.h"

#include "awi/errors.h"

namespace awi {

Vocab::Vocab() {
  add(std::string(kPadToken));
  add(std::string(kBosToken));
  add(std::string(kEosToken));
  add(std::string(kUnkToken));
}

Vocab Vocab::FromWords(const std::vector<std::string>& words) {
  Vocab v;
  for (const std::string& w : words) {
    if (w.empty()) throw FormatError("vocab: empty token");
    if (v.ids_.contains(w)) throw FormatError("vocab: duplicate token '" + w + "'");
    v.add(w);
  }
  return v;
}

void Vocab::add(std::string token) {
  ids_.emplace(token, static_cast<TokenId>(tokens_.size()));
  tokens_.push_back(std::move(token));
}

std::optional<TokenId> Vocab::find(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

TokenId Vocab::id(std::string_view token) const {
  return find(token).value_or(kUnk);
}

const std::string& Vocab::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw VocabularyError("token id " + std::to_string(id) +
                          " outside vocabulary of " +
                          std::to_string(tokens_.size()));
  }
  return tokens_[static_cast<std::size_t>(id)];
}

}  // namespace awi
