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

// LSTM and depth-gated LSTM cells.
//
// Packed gate layout along the 4H axis of w_x, w_h and b is fixed as
//   [ input i | forget f | output o | candidate g ]
// and is part of the checkpoint format.
//
// Depth-gated layers (every layer above the first unless the stack is built
// plain) add a gated path from the lower layer's current memory cell:
//   d = sigmoid(b_d + W_dx x + w_dc * c_prev + w_dl * c_below)
//   c = f * c_prev + i * g + d * c_below
//   h = o * tanh(c)

#ifndef AWI_LSTM_H_
#define AWI_LSTM_H_

#include <cstddef>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "awi/tape.h"
#include "awi/tensor.h"

namespace awi {

inline constexpr double kInitScale = 0.08;
inline constexpr double kForgetBias = 1.0;

struct LstmLayerParams {
  std::size_t input = 0;
  std::size_t hidden = 0;
  bool depth_gated = false;

  Parameter w_x;  // 4H x I
  Parameter w_h;  // 4H x H
  Parameter b;    // 1 x 4H

  // Present only when depth_gated.
  Parameter w_dx;  // H x I
  Parameter w_dc;  // 1 x H
  Parameter w_dl;  // 1 x H
  Parameter b_d;   // 1 x H

  LstmLayerParams() = default;
  // All-zero weights of the given shape.
  LstmLayerParams(const std::string& prefix, std::size_t input,
                  std::size_t hidden, bool depth_gated);

  // Weights uniform in [-scale, scale]; biases zero except the forget slice,
  // which is set to kForgetBias.
  void init_uniform(std::mt19937_64& rng, double scale = kInitScale);

  void for_each(const std::function<void(Parameter&)>& fn);
  void for_each(const std::function<void(const Parameter&)>& fn) const;
};

// Per-layer values carried between steps.
struct CellState {
  Tensor h;
  Tensor c;
};
using LstmState = std::vector<CellState>;

LstmState zero_state(std::size_t layers, std::size_t hidden);

// A layer's parameters placed on a tape.
struct LstmLayerNodes {
  std::size_t input = 0;
  std::size_t hidden = 0;
  bool depth_gated = false;
  NodeRef w_x, w_h, b;
  NodeRef w_dx, w_dc, w_dl, b_d;
};

// Trainable binding: gradients flow back into the parameters.
LstmLayerNodes bind_layer(Tape& tape, LstmLayerParams& params);
// Constant binding for inference.
LstmLayerNodes bind_layer_frozen(Tape& tape, const LstmLayerParams& params);

struct CellNodes {
  NodeRef h;
  NodeRef c;
};
using LstmStateNodes = std::vector<CellNodes>;

LstmStateNodes constant_state(Tape& tape, const LstmState& state);
LstmState state_values(const Tape& tape, const LstmStateNodes& state);

struct LstmStepResult {
  CellNodes cell;
  NodeRef input_gate;
  NodeRef forget_gate;
  NodeRef output_gate;
  NodeRef depth_gate;  // invalid unless the layer is depth gated
};

// One step of a single layer. `c_below` must be given exactly when the layer
// is depth gated.
LstmStepResult lstm_step(Tape& tape, const LstmLayerNodes& layer, NodeRef x,
                         CellNodes prev, std::optional<NodeRef> c_below = {});

// One step of a stack: layer 0 reads x, layer l > 0 reads layer l-1's new h
// and, when depth gated, its new c.
LstmStateNodes stack_step(Tape& tape, std::span<const LstmLayerNodes> stack,
                          NodeRef x, const LstmStateNodes& prev);

}  // namespace awi

#endif  // AWI_LSTM_H_
