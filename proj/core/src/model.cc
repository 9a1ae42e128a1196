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

#include "awi/model.h"

#include <random>
#include <string>

#include "awi/errors.h"

namespace awi {
namespace {

void check_ids(std::span<const TokenId> ids, std::size_t vocab_size,
               const char* what) {
  for (TokenId id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= vocab_size) {
      throw VocabularyError(std::string(what) + ": token id " +
                            std::to_string(id) + " outside vocabulary of " +
                            std::to_string(vocab_size));
    }
  }
}

void check_row(const Tape& tape, NodeRef ref, std::size_t width,
               const char* what) {
  const Tensor& t = tape.value(ref);
  if (t.rows() != 1 || t.cols() != width) {
    throw DimensionError(std::string(what) + ": got " + t.shape_string() +
                         ", expected 1x" + std::to_string(width));
  }
}

template <typename Params, typename Binder, typename LayerBinder>
ModelNodes bind_with(Tape& tape, Params& p, Binder bind_param,
                     LayerBinder bind_lstm) {
  ModelNodes n;
  n.config = p.config();
  n.embedding = bind_param(p.embedding);
  for (auto& layer : p.encoder) n.encoder.push_back(bind_lstm(tape, layer));
  n.intention = bind_lstm(tape, p.intention);
  for (auto& layer : p.decoder) n.decoder.push_back(bind_lstm(tape, layer));
  n.w_ah = bind_param(p.w_ah);
  n.w_ae = bind_param(p.w_ae);
  n.v = bind_param(p.v);
  n.w_oh = bind_param(p.w_oh);
  n.w_oc = bind_param(p.w_oc);
  n.w_oy = bind_param(p.w_oy);
  n.b_o = bind_param(p.b_o);
  return n;
}

}  // namespace

void ModelConfig::validate() const {
  if (vocab_size < kNumSpecials) {
    throw ConfigurationError("vocab_size must be >= 4, got " +
                             std::to_string(vocab_size));
  }
  if (embed == 0 || hidden == 0 || align == 0 || layers == 0) {
    throw ConfigurationError("embed, hidden, align and layers must be positive");
  }
}

AwiParams::AwiParams(const ModelConfig& config) : config_(config) {
  config.validate();
  const std::size_t V = config.vocab_size;
  const std::size_t D = config.embed;
  const std::size_t H = config.hidden;
  const std::size_t A = config.align;

  embedding = Parameter("embedding", V, D);
  for (std::size_t l = 0; l < config.layers; ++l) {
    const bool gated = l > 0 && !config.plain_lstm;
    encoder.emplace_back("encoder." + std::to_string(l), l == 0 ? D : H, H,
                         gated);
  }
  intention = LstmLayerParams("intention", 2 * H, H, false);
  for (std::size_t l = 0; l < config.layers; ++l) {
    const bool gated = l > 0 && !config.plain_lstm;
    decoder.emplace_back("decoder." + std::to_string(l), l == 0 ? 2 * D : H,
                         H, gated);
  }
  w_ah = Parameter("attention.w_ah", A, H);
  w_ae = Parameter("attention.w_ae", A, D);
  v = Parameter("attention.v", 1, A);
  w_oh = Parameter("readout.w_oh", V, H);
  w_oc = Parameter("readout.w_oc", V, D);
  w_oy = Parameter("readout.w_oy", V, D);
  b_o = Parameter("readout.b_o", 1, V);
}

AwiParams AwiParams::Zeros(const ModelConfig& config) {
  return AwiParams(config);
}

AwiParams AwiParams::Random(const ModelConfig& config, std::uint64_t seed) {
  AwiParams p(config);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-kInitScale, kInitScale);
  auto fill = [&](Parameter& param) {
    for (double& x : param.value.data()) x = dist(rng);
  };
  fill(p.embedding);
  for (auto& layer : p.encoder) layer.init_uniform(rng);
  p.intention.init_uniform(rng);
  for (auto& layer : p.decoder) layer.init_uniform(rng);
  fill(p.w_ah);
  fill(p.w_ae);
  fill(p.v);
  fill(p.w_oh);
  fill(p.w_oc);
  fill(p.w_oy);
  return p;
}

void AwiParams::for_each(const std::function<void(Parameter&)>& fn) {
  fn(embedding);
  for (auto& layer : encoder) layer.for_each(fn);
  intention.for_each(fn);
  for (auto& layer : decoder) layer.for_each(fn);
  fn(w_ah);
  fn(w_ae);
  fn(v);
  fn(w_oh);
  fn(w_oc);
  fn(w_oy);
  fn(b_o);
}

void AwiParams::for_each(const std::function<void(const Parameter&)>& fn) const {
  fn(embedding);
  for (const auto& layer : encoder) layer.for_each(fn);
  intention.for_each(fn);
  for (const auto& layer : decoder) layer.for_each(fn);
  fn(w_ah);
  fn(w_ae);
  fn(v);
  fn(w_oh);
  fn(w_oc);
  fn(w_oy);
  fn(b_o);
}

std::vector<Parameter*> AwiParams::parameters() {
  std::vector<Parameter*> out;
  for_each([&out](Parameter& p) { out.push_back(&p); });
  return out;
}

void AwiParams::zero_grad() {
  for_each([](Parameter& p) { p.zero_grad(); });
}

std::size_t AwiParams::num_values() const {
  std::size_t n = 0;
  for_each([&n](const Parameter& p) { n += p.value.size(); });
  return n;
}

ModelNodes bind(Tape& tape, AwiParams& params) {
  return bind_with(
      tape, params, [&tape](Parameter& p) { return tape.parameter(p); },
      [](Tape& t, LstmLayerParams& l) { return bind_layer(t, l); });
}

ModelNodes bind_frozen(Tape& tape, const AwiParams& params) {
  return bind_with(
      tape, params,
      [&tape](const Parameter& p) { return tape.constant(p.value); },
      [](Tape& t, const LstmLayerParams& l) { return bind_layer_frozen(t, l); });
}

DialogueState DialogueState::Zeros(std::size_t hidden) {
  DialogueState s;
  s.intention = {Tensor(1, hidden), Tensor(1, hidden)};
  s.prev_dec_h = Tensor(1, hidden);
  s.prev_dec_c = Tensor(1, hidden);
  return s;
}

DialogueStateNodes lift_state(Tape& tape, const DialogueState& state) {
  DialogueStateNodes n;
  n.intention = {tape.constant(state.intention.h),
                 tape.constant(state.intention.c)};
  n.prev_dec_h = tape.constant(state.prev_dec_h);
  n.prev_dec_c = tape.constant(state.prev_dec_c);
  n.turn_index = state.turn_index;
  return n;
}

DialogueState lower_state(const Tape& tape, const DialogueStateNodes& state) {
  DialogueState s;
  s.intention = {tape.value(state.intention.h), tape.value(state.intention.c)};
  s.prev_dec_h = tape.value(state.prev_dec_h);
  s.prev_dec_c = tape.value(state.prev_dec_c);
  s.turn_index = state.turn_index;
  return s;
}

TurnContext encode_turn(Tape& tape, const ModelNodes& model,
                        std::span<const TokenId> source,
                        const DialogueStateNodes& state) {
  if (source.empty()) throw DomainError("encode_turn: empty source");
  check_ids(source, model.config.vocab_size, "encode_turn");
  const std::size_t H = model.config.hidden;
  check_row(tape, state.prev_dec_h, H, "encode_turn: prev_dec_h");
  check_row(tape, state.prev_dec_c, H, "encode_turn: prev_dec_c");

  TurnContext ctx;
  ctx.source.assign(source.begin(), source.end());

  LstmStateNodes enc(model.encoder.size());
  enc[0] = {state.prev_dec_h, state.prev_dec_c};
  if (enc.size() > 1) {
    const NodeRef zero = tape.constant(Tensor(1, H));
    for (std::size_t l = 1; l < enc.size(); ++l) enc[l] = {zero, zero};
  }

  for (TokenId id : source) {
    const NodeRef x = tape.lookup(model.embedding, static_cast<std::size_t>(id));
    enc = stack_step(tape, model.encoder, x, enc);
    ctx.enc_h.push_back(enc.back().h);
  }
  ctx.fixed = ctx.enc_h.back();
  ctx.final_state = enc;

  std::vector<std::size_t> rows(source.begin(), source.end());
  ctx.contexts = tape.gather(model.embedding, rows);
  ctx.context_keys = tape.matmul_nt(ctx.contexts, model.w_ae);
  return ctx;
}

CellNodes intention_step(Tape& tape, const ModelNodes& model, NodeRef fixed,
                         const DialogueStateNodes& state) {
  const std::size_t H = model.config.hidden;
  check_row(tape, fixed, H, "intention_step: fixed");
  check_row(tape, state.prev_dec_h, H, "intention_step: prev_dec_h");
  const NodeRef input = tape.concat(fixed, state.prev_dec_h);
  return lstm_step(tape, model.intention, input, state.intention).cell;
}

AttentionResult attention(Tape& tape, const ModelNodes& model,
                          NodeRef dec_h_prev, const TurnContext& ctx) {
  check_row(tape, dec_h_prev, model.config.hidden, "attention: decoder state");
  // e_t = v . tanh(W_ah h + W_ae ctx_t), all t at once.
  const NodeRef query = tape.matmul_nt(dec_h_prev, model.w_ah);  // 1 x A
  const NodeRef hidden =
      tape.tanh(tape.add_row_broadcast(ctx.context_keys, query));  // T x A
  const NodeRef scores = tape.transpose(tape.matmul_nt(hidden, model.v));
  AttentionResult r;
  r.alpha = tape.softmax(scores);
  r.context = tape.matmul(r.alpha, ctx.contexts);
  return r;
}

LstmStateNodes decoder_initial_state(Tape& tape, const ModelNodes& model,
                                     CellNodes intention) {
  LstmStateNodes s(model.decoder.size());
  s[0] = intention;
  if (s.size() > 1) {
    const NodeRef zero = tape.constant(Tensor(1, model.config.hidden));
    for (std::size_t l = 1; l < s.size(); ++l) s[l] = {zero, zero};
  }
  return s;
}

DecodeStep decode_step(Tape& tape, const ModelNodes& model, TokenId y_prev,
                       const LstmStateNodes& dec_state, const TurnContext& ctx) {
  const TokenId ids[] = {y_prev};
  check_ids(ids, model.config.vocab_size, "decode_step");
  if (dec_state.size() != model.decoder.size()) {
    throw ConfigurationError("decode_step: decoder state has " +
                             std::to_string(dec_state.size()) + " layers");
  }
  const NodeRef y_embed =
      tape.lookup(model.embedding, static_cast<std::size_t>(y_prev));
  const AttentionResult att = attention(tape, model, dec_state.back().h, ctx);

  DecodeStep out;
  out.alpha = att.alpha;
  out.state = stack_step(tape, model.decoder,
                         tape.concat(y_embed, att.context), dec_state);
  const NodeRef logits = tape.add(
      tape.add(tape.matmul_nt(out.state.back().h, model.w_oh),
               tape.matmul_nt(att.context, model.w_oc)),
      tape.add(tape.matmul_nt(y_embed, model.w_oy), model.b_o));
  out.log_probs = tape.log_softmax(logits);
  return out;
}

TurnOutput turn_forward(Tape& tape, const ModelNodes& model,
                        const DialogueStateNodes& state,
                        std::span<const TokenId> source,
                        std::span<const TokenId> target) {
  if (target.empty() || target.back() != kEos) {
    throw FormatError("turn target must end with </s>");
  }
  check_ids(target, model.config.vocab_size, "turn target");

  const TurnContext ctx = encode_turn(tape, model, source, state);
  const CellNodes intent = intention_step(tape, model, ctx.fixed, state);
  LstmStateNodes dec = decoder_initial_state(tape, model, intent);

  NodeRef total;
  TokenId y_prev = kBos;
  for (TokenId y : target) {
    DecodeStep step = decode_step(tape, model, y_prev, dec, ctx);
    const NodeRef logp = tape.pick(step.log_probs, static_cast<std::size_t>(y));
    total = total.valid() ? tape.add(total, logp) : logp;
    dec = std::move(step.state);
    y_prev = y;
  }

  TurnOutput out;
  out.nll = tape.scale(total, -1.0);
  out.token_count = target.size();
  out.next_state.intention = intent;
  out.next_state.prev_dec_h = dec.back().h;
  out.next_state.prev_dec_c = dec.back().c;
  out.next_state.turn_index = state.turn_index + 1;
  return out;
}

DialogueStateNodes carry_forward(Tape& tape, const ModelNodes& model,
                                 const DialogueStateNodes& next) {
  if (model.config.carry_state) return next;
  DialogueStateNodes zero =
      lift_state(tape, DialogueState::Zeros(model.config.hidden));
  zero.turn_index = next.turn_index;
  return zero;
}

DialogueOutput dialogue_forward(Tape& tape, const ModelNodes& model,
                                const EncodedDialogue& dialogue) {
  if (dialogue.empty()) throw DomainError("dialogue has no turns");
  DialogueStateNodes state =
      lift_state(tape, DialogueState::Zeros(model.config.hidden));
  DialogueOutput out;
  for (const EncodedTurn& turn : dialogue) {
    const TurnOutput t =
        turn_forward(tape, model, state, turn.source, turn.target);
    out.nll = out.nll.valid() ? tape.add(out.nll, t.nll) : t.nll;
    out.token_count += t.token_count;
    state = carry_forward(tape, model, t.next_state);
  }
  return out;
}

TurnNll turn_nll(const AwiParams& params, const DialogueState& state,
                 std::span<const TokenId> source,
                 std::span<const TokenId> target) {
  Tape tape;
  const ModelNodes model = bind_frozen(tape, params);
  const TurnOutput out =
      turn_forward(tape, model, lift_state(tape, state), source, target);
  return {tape.scalar(out.nll), lower_state(tape, out.next_state),
          out.token_count};
}

NllCount dialogue_nll(const AwiParams& params, const EncodedDialogue& dialogue) {
  Tape tape;
  const ModelNodes model = bind_frozen(tape, params);
  const DialogueOutput out = dialogue_forward(tape, model, dialogue);
  return {tape.scalar(out.nll), out.token_count};
}

}  // namespace awi
