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

#include "awi/trainer.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <thread>

#include "awi/errors.h"

namespace awi {

void TrainConfig::validate() const {
  if (hidden == 0 || align == 0 || embed == 0 || layers == 0) {
    throw ConfigurationError("hidden, align, embed and layers must be positive");
  }
  if (!(lr0 > 0.0)) throw ConfigurationError("lr0 must be positive");
  if (max_epochs < 0) throw ConfigurationError("epochs must be >= 0");
  if (eval_threads == 0) throw ConfigurationError("eval_threads must be >= 1");
}

ModelConfig TrainConfig::model_config(std::size_t vocab_size) const {
  ModelConfig m;
  m.vocab_size = vocab_size;
  m.embed = embed;
  m.hidden = hidden;
  m.align = align;
  m.layers = layers;
  m.plain_lstm = plain_lstm;
  m.carry_state = carry_state;
  return m;
}

NllCount evaluate_nll(const AwiParams& params,
                      std::span<const EncodedDialogue> dialogues,
                      std::size_t threads) {
  std::vector<NllCount> parts(dialogues.size());
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(
                                                    dialogues.size(), 1));
  auto work = [&](std::size_t shard) {
    for (std::size_t i = shard; i < dialogues.size(); i += threads) {
      parts[i] = dialogue_nll(params, dialogues[i]);
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t s = 0; s < threads; ++s) pool.emplace_back(work, s);
  }
  NllCount total;
  for (const NllCount& p : parts) {
    total.nll += p.nll;
    total.token_count += p.token_count;
  }
  return total;
}

double evaluate_perplexity(const AwiParams& params,
                           std::span<const EncodedDialogue> dialogues,
                           std::size_t threads) {
  if (dialogues.empty()) throw DomainError("evaluate_perplexity: no dialogues");
  const NllCount total = evaluate_nll(params, dialogues, threads);
  if (total.token_count == 0) {
    throw DomainError("evaluate_perplexity: no target tokens");
  }
  return std::exp(total.nll / static_cast<double>(total.token_count));
}

double lr_update(double lr, double prev_dev_ppl, double new_dev_ppl) {
  if (!(lr > 0.0)) throw DomainError("lr_update: lr must be positive");
  return new_dev_ppl > prev_dev_ppl ? lr / 2.0 : lr;
}

double gradient_norm(const AwiParams& params) {
  double sq = 0.0;
  params.for_each([&sq](const Parameter& p) { sq += p.grad.squared_norm(); });
  return std::sqrt(sq);
}

double clip_gradients(AwiParams& params, double max_norm) {
  const double norm = gradient_norm(params);
  if (max_norm > 0.0 && norm > max_norm) {
    const double factor = max_norm / norm;
    params.for_each([factor](Parameter& p) {
      for (double& g : p.grad.data()) g *= factor;
    });
  }
  return norm;
}

void sgd_step(AwiParams& params, double lr) {
  params.for_each([lr](Parameter& p) {
    auto value = p.value.data();
    auto grad = p.grad.data();
    for (std::size_t i = 0; i < value.size(); ++i) value[i] -= lr * grad[i];
  });
}

Trainer::Trainer(TrainConfig config)
    : config_(std::move(config)), rng_(config_.seed) {
  config_.validate();
  state_.lr = config_.lr0;
}

void Trainer::set_learning_rate(double lr) {
  if (!(lr >= 0.0) || !std::isfinite(lr)) {
    throw DomainError("learning rate must be finite and >= 0");
  }
  state_.lr = lr;
}

NllCount Trainer::train_dialogue(AwiParams& params,
                                 const EncodedDialogue& dialogue,
                                 std::size_t position) {
  if (dialogue.empty()) throw DomainError("training dialogue has no turns");
  Tape tape;
  DialogueStateNodes carried =
      lift_state(tape, DialogueState::Zeros(params.config().hidden));
  NllCount seen;
  for (std::size_t k = 0; k < dialogue.size(); ++k) {
    if (observer_) observer_(position, k);
    const EncodedTurn& turn = dialogue[k];
    // Rebinding snapshots the parameters as updated by the previous turn.
    const ModelNodes model = bind(tape, params);
    const TurnOutput out =
        turn_forward(tape, model, carried, turn.source, turn.target);
    const double nll = tape.scalar(out.nll);
    if (!std::isfinite(nll)) {
      std::ostringstream msg;
      msg << "non-finite loss at epoch " << state_.epoch + 1 << ", dialogue "
          << position << ", turn " << k << " (lr " << state_.lr << ")";
      throw NumericError(msg.str());
    }
    params.zero_grad();
    tape.backward(out.nll);
    clip_gradients(params, config_.grad_clip);
    sgd_step(params, state_.lr);
    seen.nll += nll;
    seen.token_count += out.token_count;
    carried = carry_forward(tape, model, out.next_state);
  }
  params.zero_grad();
  return seen;
}

Trainer::EpochResult Trainer::train_epoch(
    AwiParams& params, std::span<const EncodedDialogue> train) {
  EpochResult result;
  result.order.resize(train.size());
  std::iota(result.order.begin(), result.order.end(), std::size_t{0});
  std::shuffle(result.order.begin(), result.order.end(), rng_);
  for (std::size_t i : result.order) {
    const NllCount d = train_dialogue(params, train[i], i);
    result.train.nll += d.nll;
    result.train.token_count += d.token_count;
  }
  return result;
}

EpochRecord Trainer::run_epoch(AwiParams& params,
                               std::span<const EncodedDialogue> train,
                               std::span<const EncodedDialogue> dev) {
  EpochRecord rec;
  rec.epoch = state_.epoch + 1;
  rec.lr = state_.lr;
  const EpochResult r = train_epoch(params, train);
  rec.train_ppl =
      r.train.token_count > 0
          ? std::exp(r.train.nll / static_cast<double>(r.train.token_count))
          : 0.0;
  rec.dev_ppl = evaluate_perplexity(params, dev, config_.eval_threads);

  state_.epoch = rec.epoch;
  state_.lr = lr_update(state_.lr, state_.last_dev_ppl, rec.dev_ppl);
  state_.last_dev_ppl = rec.dev_ppl;
  state_.best_dev_ppl = std::min(state_.best_dev_ppl, rec.dev_ppl);
  state_.history.push_back(rec);
  return rec;
}

void Trainer::fit(AwiParams& params, std::span<const EncodedDialogue> train,
                  std::span<const EncodedDialogue> dev,
                  const std::function<void(const EpochRecord&)>& on_epoch) {
  while (state_.epoch < config_.max_epochs) {
    const EpochRecord rec = run_epoch(params, train, dev);
    if (on_epoch) on_epoch(rec);
  }
}

}  // namespace awi
