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

#include "awi/inference.h"

#include <algorithm>
#include <cmath>

#include "awi/corpus.h"
#include "awi/errors.h"

namespace awi {
namespace {

std::vector<double> row_values(const Tape& tape, NodeRef ref) {
  const auto data = tape.value(ref).data();
  return {data.begin(), data.end()};
}

struct Candidate {
  std::size_t parent;
  TokenId token;
  double log_prob;
};

}  // namespace

DecodeConfig DecodeConfig::Chat() {
  DecodeConfig c;
  c.mode = DecodeMode::kBeam;
  c.beam_width = 4;
  c.length_norm = 0.6;
  return c;
}

double normalized_score(double log_prob, std::size_t length,
                        double length_norm) {
  if (length == 0) return log_prob;
  return log_prob / std::pow(static_cast<double>(length), length_norm);
}

Hypothesis greedy_decode(Tape& tape, const ModelNodes& model,
                         const TurnContext& ctx, const LstmStateNodes& init,
                         std::size_t max_len) {
  if (max_len == 0) throw DomainError("greedy_decode: max_len must be >= 1");
  Hypothesis h;
  h.state = init;
  TokenId y_prev = kBos;
  while (h.tokens.size() < max_len) {
    DecodeStep step = decode_step(tape, model, y_prev, h.state, ctx);
    const auto lp = tape.value(step.log_probs).data();
    const auto best = std::max_element(lp.begin(), lp.end());
    const auto y = static_cast<TokenId>(best - lp.begin());
    h.tokens.push_back(y);
    h.log_prob += *best;
    h.state = std::move(step.state);
    h.attention.push_back(row_values(tape, step.alpha));
    y_prev = y;
    if (y == kEos) {
      h.finished = true;
      break;
    }
  }
  return h;
}

Hypothesis beam_search(Tape& tape, const ModelNodes& model,
                       const TurnContext& ctx, const LstmStateNodes& init,
                       std::size_t width, std::size_t max_len,
                       double length_norm) {
  if (width == 0) throw DomainError("beam_search: width must be >= 1");
  if (max_len == 0) throw DomainError("beam_search: max_len must be >= 1");

  std::vector<Hypothesis> live(1);
  live[0].state = init;
  std::vector<Hypothesis> pool;

  for (std::size_t step = 0; step < max_len && !live.empty(); ++step) {
    std::vector<DecodeStep> expanded;
    expanded.reserve(live.size());
    std::vector<Candidate> candidates;
    for (std::size_t i = 0; i < live.size(); ++i) {
      const TokenId y_prev = live[i].tokens.empty() ? kBos : live[i].tokens.back();
      expanded.push_back(decode_step(tape, model, y_prev, live[i].state, ctx));
      const auto lp = tape.value(expanded.back().log_probs).data();
      for (std::size_t y = 0; y < lp.size(); ++y) {
        candidates.push_back(
            {i, static_cast<TokenId>(y), live[i].log_prob + lp[y]});
      }
    }
    // Candidates are generated in (parent, token) order; stable sorting keeps
    // that order among ties, which matches greedy's lowest-id tie-break.
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) {
                       return a.log_prob > b.log_prob;
                     });
    if (candidates.size() > width) candidates.resize(width);

    std::vector<Hypothesis> next;
    for (const Candidate& c : candidates) {
      Hypothesis h;
      h.tokens = live[c.parent].tokens;
      h.tokens.push_back(c.token);
      h.log_prob = c.log_prob;
      h.state = expanded[c.parent].state;
      h.attention = live[c.parent].attention;
      h.attention.push_back(row_values(tape, expanded[c.parent].alpha));
      h.finished = c.token == kEos;
      (h.finished ? pool : next).push_back(std::move(h));
    }
    live = std::move(next);
  }
  for (Hypothesis& h : live) pool.push_back(std::move(h));

  auto best = pool.begin();
  for (auto it = pool.begin(); it != pool.end(); ++it) {
    if (it->score(length_norm) > best->score(length_norm)) best = it;
  }
  return std::move(*best);
}

Session::Session(const Vocab& vocab, std::size_t hidden, DecodeConfig decode)
    : vocab_(&vocab), decode_(decode), state_(DialogueState::Zeros(hidden)) {
  if (decode_.max_len == 0) throw DomainError("session: max_len must be >= 1");
}

Reply respond(Session& session, const AwiParams& params,
              std::string_view user_text) {
  const std::vector<std::string> words = tokenize(user_text);
  if (words.empty()) throw DomainError("empty user input");
  const Vocab& vocab = session.vocab();
  if (vocab.size() != params.config().vocab_size) {
    throw ConfigurationError("session vocabulary does not match the model");
  }
  const std::vector<TokenId> source = encode(user_text, vocab);
  const DecodeConfig& cfg = session.decode_config();

  Tape tape;
  const ModelNodes model = bind_frozen(tape, params);
  const DialogueStateNodes state = lift_state(tape, session.state());
  const TurnContext ctx = encode_turn(tape, model, source, state);
  const CellNodes intent = intention_step(tape, model, ctx.fixed, state);
  const LstmStateNodes init = decoder_initial_state(tape, model, intent);

  const Hypothesis best =
      cfg.mode == DecodeMode::kBeam
          ? beam_search(tape, model, ctx, init, cfg.beam_width, cfg.max_len,
                        cfg.length_norm)
          : greedy_decode(tape, model, ctx, init, cfg.max_len);

  DialogueState next;
  if (params.config().carry_state) {
    next.intention = {tape.value(intent.h), tape.value(intent.c)};
    next.prev_dec_h = tape.value(best.state.back().h);
    next.prev_dec_c = tape.value(best.state.back().c);
  } else {
    next = DialogueState::Zeros(params.config().hidden);
  }
  next.turn_index = session.state().turn_index + 1;
  session.mutable_state() = std::move(next);

  Reply reply;
  reply.tokens = best.tokens;
  reply.text = decode(best.tokens, vocab);
  reply.attention = best.attention;
  for (TokenId id : best.tokens) reply.reply_tokens.push_back(vocab.token(id));
  for (TokenId id : source) reply.source_tokens.push_back(vocab.token(id));
  return reply;
}

}  // namespace awi
