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

// Sentence-level SGD for the dialogue model.
//
// One epoch shuffles the dialogue order, then walks each dialogue's turns in
// corpus order. Every turn is one update: forward on the dialogue's tape
// (earlier turns stay on it, so the loss backpropagates into the turns that
// produced the carried state), backward, global-norm clipping, then a plain
// SGD step. After each epoch the dev perplexity is measured and the learning
// rate halves if it went up.

#ifndef AWI_TRAINER_H_
#define AWI_TRAINER_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "awi/model.h"

namespace awi {

struct TrainConfig {
  std::size_t hidden = 50;
  std::size_t align = 25;
  std::size_t embed = 32;
  std::size_t layers = 1;
  double lr0 = 0.1;
  int max_epochs = 10;
  std::uint64_t seed = 1;
  // Global gradient-norm ceiling; <= 0 disables clipping.
  double grad_clip = 5.0;
  bool plain_lstm = false;
  bool carry_state = true;
  std::size_t eval_threads = 1;

  void validate() const;
  ModelConfig model_config(std::size_t vocab_size) const;
};

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;         // rate used during the epoch
  double train_ppl = 0.0;  // running perplexity over the epoch's updates
  double dev_ppl = 0.0;
};

struct TrainState {
  int epoch = 0;
  double lr = 0.0;
  double best_dev_ppl = std::numeric_limits<double>::infinity();
  double last_dev_ppl = std::numeric_limits<double>::infinity();
  std::vector<EpochRecord> history;
};

// Summed NLL and target-token count over a set of dialogues. Per-dialogue
// results are combined in input order, so the total does not depend on
// `threads`.
NllCount evaluate_nll(const AwiParams& params,
                      std::span<const EncodedDialogue> dialogues,
                      std::size_t threads = 1);

// exp(total NLL / total target tokens). DomainError on an empty set.
double evaluate_perplexity(const AwiParams& params,
                           std::span<const EncodedDialogue> dialogues,
                           std::size_t threads = 1);

// Halves `lr` iff new_dev_ppl > prev_dev_ppl.
double lr_update(double lr, double prev_dev_ppl, double new_dev_ppl);

// Global L2 norm of all parameter gradients.
double gradient_norm(const AwiParams& params);
// Rescales gradients so the global norm is at most `max_norm`. Returns the
// norm before clipping.
double clip_gradients(AwiParams& params, double max_norm);
// value -= lr * grad for every parameter.
void sgd_step(AwiParams& params, double lr);

class Trainer {
 public:
  // Called before each turn's update with (position of the dialogue in the
  // training set, turn index).
  using TurnObserver = std::function<void(std::size_t, std::size_t)>;

  explicit Trainer(TrainConfig config);

  const TrainConfig& config() const { return config_; }
  const TrainState& state() const { return state_; }
  void set_observer(TurnObserver observer) { observer_ = std::move(observer); }
  // Overrides the current rate, e.g. when resuming. Zero is allowed.
  void set_learning_rate(double lr);

  struct EpochResult {
    std::vector<std::size_t> order;  // dialogue indices in visiting order
    NllCount train;                  // losses as seen during the updates
  };

  // One pass over `train` at the current learning rate. Does not touch the
  // schedule. Throws NumericError on a non-finite loss.
  EpochResult train_epoch(AwiParams& params,
                          std::span<const EncodedDialogue> train);

  // train_epoch, dev evaluation, learning-rate update and history entry.
  EpochRecord run_epoch(AwiParams& params,
                        std::span<const EncodedDialogue> train,
                        std::span<const EncodedDialogue> dev);

  // run_epoch until config().max_epochs.
  void fit(AwiParams& params, std::span<const EncodedDialogue> train,
           std::span<const EncodedDialogue> dev,
           const std::function<void(const EpochRecord&)>& on_epoch = {});

 private:
  NllCount train_dialogue(AwiParams& params, const EncodedDialogue& dialogue,
                          std::size_t position);

  TrainConfig config_;
  std::mt19937_64 rng_;
  TrainState state_;
  TurnObserver observer_;
};

}  // namespace awi

#endif  // AWI_TRAINER_H_
