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

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "awi/inference.h"
#include "awi/lstm.h"
#include "awi/model.h"

namespace awi {
namespace {

ModelConfig bench_config(std::size_t hidden) {
  ModelConfig c;
  c.vocab_size = 1000;
  c.embed = 32;
  c.hidden = hidden;
  c.align = 25;
  c.layers = 1;
  return c;
}

std::vector<TokenId> random_tokens(std::mt19937_64& rng, std::size_t n,
                                   std::size_t vocab) {
  std::uniform_int_distribution<TokenId> pick(kNumSpecials,
                                              static_cast<TokenId>(vocab - 1));
  std::vector<TokenId> out(n);
  for (TokenId& t : out) t = pick(rng);
  return out;
}

void BM_LstmStep(benchmark::State& st) {
  const auto h = static_cast<std::size_t>(st.range(0));
  std::mt19937_64 rng(1);
  LstmLayerParams layer("bench", h, h, false);
  layer.init_uniform(rng);
  for (auto _ : st) {
    Tape tape;
    const LstmLayerNodes nodes = bind_layer_frozen(tape, layer);
    NodeRef x = tape.constant(Tensor(1, h));
    CellNodes prev{tape.constant(Tensor(1, h)),
                   tape.constant(Tensor(1, h))};
    benchmark::DoNotOptimize(lstm_step(tape, nodes, x, prev).cell.h);
  }
}
BENCHMARK(BM_LstmStep)->Arg(50)->Arg(200);

void BM_TurnForwardBackward(benchmark::State& st) {
  const auto h = static_cast<std::size_t>(st.range(0));
  AwiParams params = AwiParams::Random(bench_config(h), 2);
  std::mt19937_64 rng(3);
  const std::vector<TokenId> source = random_tokens(rng, 12, 1000);
  std::vector<TokenId> target = random_tokens(rng, 11, 1000);
  target.push_back(kEos);
  for (auto _ : st) {
    Tape tape;
    const ModelNodes model = bind(tape, params);
    const DialogueStateNodes state =
        lift_state(tape, DialogueState::Zeros(h));
    const TurnOutput out = turn_forward(tape, model, state, source, target);
    tape.backward(out.nll);
  }
  params.zero_grad();
}
BENCHMARK(BM_TurnForwardBackward)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

void BM_BeamSearch(benchmark::State& st) {
  const auto width = static_cast<std::size_t>(st.range(0));
  const AwiParams params = AwiParams::Random(bench_config(50), 4);
  std::mt19937_64 rng(5);
  const std::vector<TokenId> source = random_tokens(rng, 12, 1000);
  for (auto _ : st) {
    Tape tape;
    const ModelNodes model = bind_frozen(tape, params);
    const DialogueStateNodes state =
        lift_state(tape, DialogueState::Zeros(50));
    const TurnContext ctx = encode_turn(tape, model, source, state);
    const CellNodes intention = intention_step(tape, model, ctx.fixed, state);
    const LstmStateNodes init = decoder_initial_state(tape, model, intention);
    benchmark::DoNotOptimize(
        beam_search(tape, model, ctx, init, width, 10, 0.6).log_prob);
  }
}
BENCHMARK(BM_BeamSearch)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace awi

BENCHMARK_MAIN();
