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
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "awi/corpus.h"
#include "awi/errors.h"
#include "awi/inference.h"
#include "test_util.h"

namespace awi {
namespace {

using testing::dense_random_params;
using testing::tiny_config;

Vocab vocab_of_size(std::size_t n) {
  std::vector<std::string> words;
  for (std::size_t i = kNumSpecials; i < n; ++i) {
    words.push_back("w" + std::to_string(i));
  }
  return Vocab::FromWords(words);
}

// A decoding problem: a model plus one encoded source with its start state.
struct Problem {
  Tape tape;
  ModelNodes model;
  TurnContext ctx;
  LstmStateNodes init;
};

void setup(Problem& p, const AwiParams& params,
           const std::vector<TokenId>& source) {
  p.model = bind_frozen(p.tape, params);
  const DialogueStateNodes s =
      lift_state(p.tape, DialogueState::Zeros(params.config().hidden));
  p.ctx = encode_turn(p.tape, p.model, source, s);
  p.init = decoder_initial_state(p.tape, p.model,
                                 intention_step(p.tape, p.model, p.ctx.fixed, s));
}

// Log-probability of a token sequence under teacher forcing.
double sequence_log_prob(Problem& p, const std::vector<TokenId>& seq) {
  LstmStateNodes state = p.init;
  TokenId prev = kBos;
  double total = 0.0;
  for (TokenId y : seq) {
    const DecodeStep step = decode_step(p.tape, p.model, prev, state, p.ctx);
    total += p.tape.value(step.log_probs)[static_cast<std::size_t>(y)];
    state = step.state;
    prev = y;
  }
  return total;
}

ModelConfig small_vocab_config(std::size_t vocab) {
  ModelConfig c = tiny_config();
  c.vocab_size = vocab;
  return c;
}

TEST(Greedy, PicksArgmaxEachStep) {
  const AwiParams params = dense_random_params(tiny_config(), 1, 1.0);
  Problem p;
  setup(p, params, {4, 5, 6});
  const Hypothesis h = greedy_decode(p.tape, p.model, p.ctx, p.init, 8);
  ASSERT_FALSE(h.tokens.empty());
  EXPECT_EQ(h.finished, h.tokens.back() == kEos);
  LstmStateNodes state = p.init;
  TokenId prev = kBos;
  for (TokenId y : h.tokens) {
    const DecodeStep step = decode_step(p.tape, p.model, prev, state, p.ctx);
    const Tensor& lp = p.tape.value(step.log_probs);
    for (std::size_t k = 0; k < lp.size(); ++k) {
      EXPECT_LE(lp[k], lp[static_cast<std::size_t>(y)]);
    }
    state = step.state;
    prev = y;
  }
  EXPECT_NEAR(h.log_prob, sequence_log_prob(p, h.tokens), 1e-12);
}

TEST(Greedy, StopsAtMaxLength) {
  AwiParams params = AwiParams::Zeros(tiny_config());
  params.b_o.value[7] = 10.0;  // never emits </s>
  Problem p;
  setup(p, params, {4});
  const Hypothesis h = greedy_decode(p.tape, p.model, p.ctx, p.init, 5);
  EXPECT_EQ(h.tokens, std::vector<TokenId>(5, 7));
  EXPECT_FALSE(h.finished);
  EXPECT_THROW(greedy_decode(p.tape, p.model, p.ctx, p.init, 0), DomainError);
}

TEST(Beam, WidthOneIsGreedy) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const AwiParams params = dense_random_params(tiny_config(), seed, 1.5);
    Problem p;
    setup(p, params, {4, 9, 12});
    const Hypothesis g = greedy_decode(p.tape, p.model, p.ctx, p.init, 10);
    const Hypothesis b =
        beam_search(p.tape, p.model, p.ctx, p.init, 1, 10, 0.6);
    EXPECT_EQ(b.tokens, g.tokens) << "seed " << seed;
    EXPECT_EQ(b.log_prob, g.log_prob);
  }
}

TEST(Beam, TiesBreakTowardLowerIds) {
  // A uniform model: every candidate ties, so both pick id 0 first.
  const AwiParams params = AwiParams::Zeros(tiny_config());
  Problem p;
  setup(p, params, {4});
  const Hypothesis g = greedy_decode(p.tape, p.model, p.ctx, p.init, 3);
  const Hypothesis b = beam_search(p.tape, p.model, p.ctx, p.init, 1, 3, 0.6);
  EXPECT_EQ(g.tokens, (std::vector<TokenId>{0, 0, 0}));
  EXPECT_EQ(b.tokens, g.tokens);
}

TEST(Beam, UnprunedSearchDominatesGreedy) {
  // Width 125 keeps every candidate for V=5 and three steps.
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const AwiParams params =
        dense_random_params(small_vocab_config(5), seed, 1.5);
    Problem p;
    setup(p, params, {4, 4});
    const Hypothesis g = greedy_decode(p.tape, p.model, p.ctx, p.init, 3);
    const Hypothesis b =
        beam_search(p.tape, p.model, p.ctx, p.init, 125, 3, 0.6);
    EXPECT_GE(b.score(0.6), g.score(0.6)) << "seed " << seed;
  }
}

TEST(Beam, PrunedSearchCanMissTheGreedyPath) {
  // A narrow beam ranks by cumulative log-prob, so the greedy prefix can be
  // pruned even though its normalized final score would have won.
  const AwiParams params = dense_random_params(tiny_config(), 10, 1.5);
  Problem p;
  setup(p, params, {5, 6, 7, 8});
  const Hypothesis g = greedy_decode(p.tape, p.model, p.ctx, p.init, 6);
  const Hypothesis b = beam_search(p.tape, p.model, p.ctx, p.init, 4, 6, 0.6);
  EXPECT_LT(b.score(0.6), g.score(0.6));
  EXPECT_NE(b.tokens, g.tokens);
}

TEST(Beam, LogProbNeverIncreasesAlongHypothesis) {
  const AwiParams params = dense_random_params(tiny_config(), 3, 1.5);
  Problem p;
  setup(p, params, {5, 6});
  const Hypothesis b = beam_search(p.tape, p.model, p.ctx, p.init, 4, 8, 0.6);
  double prefix = 0.0;
  for (std::size_t n = 1; n <= b.tokens.size(); ++n) {
    const double lp = sequence_log_prob(
        p, std::vector<TokenId>(b.tokens.begin(), b.tokens.begin() + n));
    EXPECT_LE(lp, prefix + 1e-15);
    prefix = lp;
  }
  EXPECT_NEAR(b.log_prob, prefix, 1e-12);
  EXPECT_EQ(b.finished, !b.tokens.empty() && b.tokens.back() == kEos);
  EXPECT_EQ(b.attention.size(), b.tokens.size());
}

// Every sequence the search can return: those ending at their first </s>
// with length <= max_len, and the unfinished ones of length max_len.
void enumerate(std::size_t vocab, std::size_t max_len,
               std::vector<TokenId>& prefix,
               std::vector<std::vector<TokenId>>& out) {
  for (std::size_t y = 0; y < vocab; ++y) {
    prefix.push_back(static_cast<TokenId>(y));
    if (y == static_cast<std::size_t>(kEos) || prefix.size() == max_len) {
      out.push_back(prefix);
    } else {
      enumerate(vocab, max_len, prefix, out);
    }
    prefix.pop_back();
  }
}

TEST(Beam, FullWidthMatchesExhaustiveSearch) {
  constexpr std::size_t kVocab = 5;
  constexpr std::size_t kMaxLen = 3;
  std::vector<std::vector<TokenId>> all;
  std::vector<TokenId> prefix;
  enumerate(kVocab, kMaxLen, prefix, all);
  ASSERT_EQ(all.size(), 1u + 4u + 16u + 64u);

  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    for (double norm : {0.0, 0.6, 1.0}) {
      const AwiParams params =
          dense_random_params(small_vocab_config(kVocab), seed, 2.0);
      Problem p;
      setup(p, params, {4, 4});
      double best = -INFINITY;
      std::vector<TokenId> best_seq;
      for (const auto& seq : all) {
        const double s =
            normalized_score(sequence_log_prob(p, seq), seq.size(), norm);
        if (s > best) {
          best = s;
          best_seq = seq;
        }
      }
      const Hypothesis b =
          beam_search(p.tape, p.model, p.ctx, p.init, 125, kMaxLen, norm);
      EXPECT_EQ(b.tokens, best_seq) << "seed " << seed << " norm " << norm;
      EXPECT_NEAR(b.score(norm), best, 1e-12);
    }
  }
}

TEST(Beam, RejectsZeroWidthOrLength) {
  const AwiParams params = dense_random_params(tiny_config(), 4);
  Problem p;
  setup(p, params, {4});
  EXPECT_THROW(beam_search(p.tape, p.model, p.ctx, p.init, 0, 5, 0.6),
               DomainError);
  EXPECT_THROW(beam_search(p.tape, p.model, p.ctx, p.init, 2, 0, 0.6),
               DomainError);
}

TEST(NormalizedScore, DividesByPowerOfLength) {
  EXPECT_DOUBLE_EQ(normalized_score(-4.0, 4, 1.0), -1.0);
  EXPECT_DOUBLE_EQ(normalized_score(-4.0, 4, 0.0), -4.0);
  EXPECT_DOUBLE_EQ(normalized_score(-4.0, 4, 0.5), -2.0);
}

class SessionTest : public ::testing::Test {
 protected:
  SessionTest()
      : vocab_(vocab_of_size(20)),
        params_(dense_random_params(tiny_config(), 5, 1.0)) {}

  Vocab vocab_;
  AwiParams params_;
};

TEST_F(SessionTest, ClonedSessionsReplyIdentically) {
  Session a(vocab_, 8);
  respond(a, params_, "w4 w5 w6");
  Session b = a;
  const Reply ra = respond(a, params_, "w7 w8");
  const Reply rb = respond(b, params_, "w7 w8");
  EXPECT_EQ(ra.tokens, rb.tokens);
  EXPECT_EQ(ra.attention, rb.attention);
  EXPECT_EQ(a.state().intention.h, b.state().intention.h);
}

TEST_F(SessionTest, AttentionShapeAndNormalization) {
  Session s(vocab_, 8);
  const Reply r = respond(s, params_, "w4 w5 W6 unknownword");
  EXPECT_EQ(r.source_tokens,
            (std::vector<std::string>{"w4", "w5", "w6", "<unk>", "</s>"}));
  ASSERT_EQ(r.attention.size(), r.tokens.size());
  ASSERT_EQ(r.reply_tokens.size(), r.tokens.size());
  for (const auto& row : r.attention) {
    ASSERT_EQ(row.size(), 5u);
    double sum = 0.0;
    for (double a : row) {
      EXPECT_GE(a, 0.0);
      sum += a;
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
  }
}

TEST_F(SessionTest, StateAdvancesEveryTurn) {
  Session s(vocab_, 8);
  DialogueState before = s.state();
  for (std::size_t k = 1; k <= 3; ++k) {
    respond(s, params_, "w9 w10");
    EXPECT_EQ(s.turn_index(), k);
    EXPECT_GT(max_abs_diff(s.state().intention.h, before.intention.h), 1e-9);
    EXPECT_GT(max_abs_diff(s.state().prev_dec_h, before.prev_dec_h), 1e-9);
    before = s.state();
  }
}

TEST_F(SessionTest, HistoryChangesTheReplyDistribution) {
  Session fresh(vocab_, 8);
  Session primed(vocab_, 8);
  respond(primed, params_, "w11 w12 w13");
  // Same text, different carried state: the encoder outputs differ, so the
  // first-step attention differs.
  const Reply a = respond(fresh, params_, "w4 w5");
  const Reply b = respond(primed, params_, "w4 w5");
  ASSERT_FALSE(a.attention.empty());
  ASSERT_FALSE(b.attention.empty());
  EXPECT_NE(a.attention[0], b.attention[0]);
}

TEST_F(SessionTest, NoMemoryModelResetsState) {
  ModelConfig c = tiny_config();
  c.carry_state = false;
  const AwiParams params = dense_random_params(c, 6, 1.0);
  Session s(vocab_, 8);
  respond(s, params, "w4");
  EXPECT_EQ(s.turn_index(), 1u);
  EXPECT_EQ(s.state().intention.h, Tensor(1, 8));
  EXPECT_EQ(s.state().prev_dec_h, Tensor(1, 8));
}

TEST_F(SessionTest, RepliesAlwaysTerminate) {
  DecodeConfig cfg;
  cfg.max_len = 4;
  for (DecodeMode mode : {DecodeMode::kGreedy, DecodeMode::kBeam}) {
    cfg.mode = mode;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const AwiParams params = dense_random_params(tiny_config(), seed, 2.0);
      Session s(vocab_, 8, cfg);
      const Reply r = respond(s, params, "w4 w5");
      EXPECT_LE(r.tokens.size(), 4u);
      const bool finished = !r.tokens.empty() && r.tokens.back() == kEos;
      EXPECT_TRUE(finished || r.tokens.size() == 4u);
    }
  }
}

TEST_F(SessionTest, InputErrors) {
  Session s(vocab_, 8);
  EXPECT_THROW(respond(s, params_, "   "), DomainError);
  EXPECT_EQ(s.turn_index(), 0u);
  const Vocab other = vocab_of_size(21);
  Session t(other, 8);
  EXPECT_THROW(respond(t, params_, "w4"), ConfigurationError);
  DecodeConfig bad;
  bad.max_len = 0;
  EXPECT_THROW(Session(vocab_, 8, bad), DomainError);
}

}  // namespace
}  // namespace awi
