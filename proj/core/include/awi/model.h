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

// The attention-with-intention dialogue model.
//
// Each turn runs three recurrent networks:
//   encoder    reads the user utterance, starting from the previous turn's
//              final decoder state;
//   intention  one LSTM step per turn over [fixed source summary, previous
//              decoder hidden], carrying its own state across turns;
//   decoder    a language model over the reply, started from the intention
//              state and attending over the source word embeddings with an
//              additive (one hidden layer of size A) alignment network.
//
// All functions here build on a caller-owned Tape. The value-level wrappers
// at the bottom (turn_nll, dialogue_nll) build and discard their own tape.

#ifndef AWI_MODEL_H_
#define AWI_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "awi/lstm.h"
#include "awi/tape.h"
#include "awi/tensor.h"
#include "awi/vocab.h"

namespace awi {

struct ModelConfig {
  std::size_t vocab_size = 0;
  std::size_t embed = 0;   // D; also the attention context width
  std::size_t hidden = 0;  // H
  std::size_t align = 0;   // A
  std::size_t layers = 1;  // encoder and decoder stack depth
  bool plain_lstm = false;
  // When false the DialogueState is reset to zeros at every turn boundary
  // (the no-memory ablation).
  bool carry_state = true;

  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

class AwiParams {
 public:
  AwiParams() = default;
  // All parameters zero.
  explicit AwiParams(const ModelConfig& config);

  static AwiParams Zeros(const ModelConfig& config);
  // LSTM weights and every projection uniform in [-kInitScale, kInitScale],
  // forget biases 1, other biases 0.
  static AwiParams Random(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }

  // Stable order; names are unique and used by checkpoints.
  void for_each(const std::function<void(Parameter&)>& fn);
  void for_each(const std::function<void(const Parameter&)>& fn) const;
  std::vector<Parameter*> parameters();

  void zero_grad();
  std::size_t num_values() const;

  Parameter embedding;  // V x D, shared by source, target input and readout
  std::vector<LstmLayerParams> encoder;  // input D
  LstmLayerParams intention;             // input 2H, single plain layer
  std::vector<LstmLayerParams> decoder;  // input 2D (embedding ++ context)
  Parameter w_ah;  // A x H
  Parameter w_ae;  // A x D
  Parameter v;     // 1 x A
  Parameter w_oh;  // V x H
  Parameter w_oc;  // V x D
  Parameter w_oy;  // V x D
  Parameter b_o;   // 1 x V

 private:
  ModelConfig config_;
};

// Parameters placed on one tape.
struct ModelNodes {
  ModelConfig config;
  NodeRef embedding;
  std::vector<LstmLayerNodes> encoder;
  LstmLayerNodes intention;
  std::vector<LstmLayerNodes> decoder;
  NodeRef w_ah, w_ae, v;
  NodeRef w_oh, w_oc, w_oy, b_o;
};

ModelNodes bind(Tape& tape, AwiParams& params);
ModelNodes bind_frozen(Tape& tape, const AwiParams& params);

// State carried from one turn to the next.
struct DialogueState {
  CellState intention;
  Tensor prev_dec_h;  // last decoder hidden of the previous turn
  Tensor prev_dec_c;
  std::size_t turn_index = 0;

  static DialogueState Zeros(std::size_t hidden);
};

struct DialogueStateNodes {
  CellNodes intention;
  NodeRef prev_dec_h;
  NodeRef prev_dec_c;
  std::size_t turn_index = 0;
};

DialogueStateNodes lift_state(Tape& tape, const DialogueState& state);
DialogueState lower_state(const Tape& tape, const DialogueStateNodes& state);

struct TurnContext {
  std::vector<TokenId> source;
  std::vector<NodeRef> enc_h;  // top-layer hidden per position
  NodeRef contexts;            // T x D, row t = embedding of source[t]
  NodeRef context_keys;        // T x A, contexts * W_ae^T
  NodeRef fixed;               // == enc_h.back()
  LstmStateNodes final_state;

  std::size_t length() const { return source.size(); }
};

TurnContext encode_turn(Tape& tape, const ModelNodes& model,
                        std::span<const TokenId> source,
                        const DialogueStateNodes& state);

// New intention (h, c) from the fixed source summary and the carried state.
CellNodes intention_step(Tape& tape, const ModelNodes& model, NodeRef fixed,
                         const DialogueStateNodes& state);

struct AttentionResult {
  NodeRef alpha;    // 1 x T, a probability vector
  NodeRef context;  // 1 x D
};

AttentionResult attention(Tape& tape, const ModelNodes& model,
                          NodeRef dec_h_prev, const TurnContext& ctx);

// Bottom decoder layer starts from the intention state, upper layers at 0.
LstmStateNodes decoder_initial_state(Tape& tape, const ModelNodes& model,
                                     CellNodes intention);

struct DecodeStep {
  NodeRef log_probs;  // 1 x V
  LstmStateNodes state;
  NodeRef alpha;      // 1 x T
};

DecodeStep decode_step(Tape& tape, const ModelNodes& model, TokenId y_prev,
                       const LstmStateNodes& dec_state, const TurnContext& ctx);

struct TurnOutput {
  NodeRef nll;  // 1 x 1
  DialogueStateNodes next_state;
  std::size_t token_count = 0;
};

// Teacher-forced negative log-likelihood of one exchange. `target` must end
// with </s>; the first decoder input is <s>.
TurnOutput turn_forward(Tape& tape, const ModelNodes& model,
                        const DialogueStateNodes& state,
                        std::span<const TokenId> source,
                        std::span<const TokenId> target);

// The state the next turn starts from: `next` itself, or zeros when the
// model is configured without cross-turn memory.
DialogueStateNodes carry_forward(Tape& tape, const ModelNodes& model,
                                 const DialogueStateNodes& next);

struct EncodedTurn {
  std::vector<TokenId> source;
  std::vector<TokenId> target;
  friend bool operator==(const EncodedTurn&, const EncodedTurn&) = default;
};
using EncodedDialogue = std::vector<EncodedTurn>;

struct DialogueOutput {
  NodeRef nll;  // summed over turns
  std::size_t token_count = 0;
};

DialogueOutput dialogue_forward(Tape& tape, const ModelNodes& model,
                                const EncodedDialogue& dialogue);

struct TurnNll {
  double nll = 0.0;
  DialogueState next_state;
  std::size_t token_count = 0;
};

TurnNll turn_nll(const AwiParams& params, const DialogueState& state,
                 std::span<const TokenId> source,
                 std::span<const TokenId> target);

struct NllCount {
  double nll = 0.0;
  std::size_t token_count = 0;
};

NllCount dialogue_nll(const AwiParams& params, const EncodedDialogue& dialogue);

}  // namespace awi

#endif  // AWI_MODEL_H_
