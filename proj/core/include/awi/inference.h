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

#ifndef AWI_INFERENCE_H_
#define AWI_INFERENCE_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "awi/model.h"
#include "awi/vocab.h"

namespace awi {

enum class DecodeMode { kGreedy, kBeam };

struct DecodeConfig {
  DecodeMode mode = DecodeMode::kGreedy;
  std::size_t beam_width = 4;
  std::size_t max_len = 30;
  double length_norm = 0.6;

  // Beam width 4, length normalization 0.6.
  static DecodeConfig Chat();
};

// log_prob / length^length_norm.
double normalized_score(double log_prob, std::size_t length,
                        double length_norm);

struct Hypothesis {
  std::vector<TokenId> tokens;
  double log_prob = 0.0;
  LstmStateNodes state;  // decoder state after the last token
  bool finished = false;
  std::vector<std::vector<double>> attention;  // one row per token

  double score(double length_norm) const {
    return normalized_score(log_prob, tokens.size(), length_norm);
  }
};

// Argmax decoding; ties go to the lowest token id.
Hypothesis greedy_decode(Tape& tape, const ModelNodes& model,
                         const TurnContext& ctx, const LstmStateNodes& init,
                         std::size_t max_len);

// Each step expands every live hypothesis over the whole vocabulary and keeps
// the `width` best by cumulative log-prob; kept hypotheses ending in </s> move
// to the finished pool. Whatever is still live at max_len joins the pool too.
// The pool is ranked by normalized_score. Width 1 reproduces greedy_decode.
Hypothesis beam_search(Tape& tape, const ModelNodes& model,
                       const TurnContext& ctx, const LstmStateNodes& init,
                       std::size_t width, std::size_t max_len,
                       double length_norm);

struct Reply {
  std::string text;                         // specials stripped
  std::vector<TokenId> tokens;              // includes </s> when finished
  std::vector<std::string> reply_tokens;    // labels for attention rows
  std::vector<std::string> source_tokens;   // labels for attention columns
  std::vector<std::vector<double>> attention;  // reply x source
};

// Live conversation state. Copying a Session forks the conversation.
class Session {
 public:
  Session(const Vocab& vocab, std::size_t hidden, DecodeConfig decode = {});

  const DialogueState& state() const { return state_; }
  DialogueState& mutable_state() { return state_; }
  const Vocab& vocab() const { return *vocab_; }
  const DecodeConfig& decode_config() const { return decode_; }
  std::size_t turn_index() const { return state_.turn_index; }

 private:
  const Vocab* vocab_;
  DecodeConfig decode_;
  DialogueState state_;
};

// Encodes the user text against the carried state, advances the intention,
// decodes a reply and stores the new state in the session. DomainError if
// the text is empty after normalization.
Reply respond(Session& session, const AwiParams& params,
              std::string_view user_text);

}  // namespace awi

#endif  // AWI_INFERENCE_H_
