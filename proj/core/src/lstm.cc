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

#include "awi/lstm.h"

#include "awi/errors.h"

namespace awi {

LstmLayerParams::LstmLayerParams(const std::string& prefix, std::size_t in,
                                 std::size_t hid, bool gated)
    : input(in),
      hidden(hid),
      depth_gated(gated),
      w_x(prefix + ".w_x", 4 * hid, in),
      w_h(prefix + ".w_h", 4 * hid, hid),
      b(prefix + ".b", 1, 4 * hid) {
  if (in == 0 || hid == 0) {
    throw ConfigurationError("lstm layer " + prefix + ": dims must be positive");
  }
  if (depth_gated) {
    w_dx = Parameter(prefix + ".w_dx", hid, in);
    w_dc = Parameter(prefix + ".w_dc", 1, hid);
    w_dl = Parameter(prefix + ".w_dl", 1, hid);
    b_d = Parameter(prefix + ".b_d", 1, hid);
  }
}

void LstmLayerParams::init_uniform(std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  auto fill = [&](Parameter& p) {
    for (double& v : p.value.data()) v = dist(rng);
  };
  fill(w_x);
  fill(w_h);
  b.value.fill(0.0);
  for (std::size_t j = hidden; j < 2 * hidden; ++j) b.value[j] = kForgetBias;
  if (depth_gated) {
    fill(w_dx);
    fill(w_dc);
    fill(w_dl);
    b_d.value.fill(0.0);
  }
}

void LstmLayerParams::for_each(const std::function<void(Parameter&)>& fn) {
  fn(w_x);
  fn(w_h);
  fn(b);
  if (depth_gated) {
    fn(w_dx);
    fn(w_dc);
    fn(w_dl);
    fn(b_d);
  }
}

void LstmLayerParams::for_each(
    const std::function<void(const Parameter&)>& fn) const {
  fn(w_x);
  fn(w_h);
  fn(b);
  if (depth_gated) {
    fn(w_dx);
    fn(w_dc);
    fn(w_dl);
    fn(b_d);
  }
}

LstmState zero_state(std::size_t layers, std::size_t hidden) {
  return LstmState(layers, CellState{Tensor(1, hidden), Tensor(1, hidden)});
}

LstmLayerNodes bind_layer(Tape& tape, LstmLayerParams& params) {
  LstmLayerNodes n;
  n.input = params.input;
  n.hidden = params.hidden;
  n.depth_gated = params.depth_gated;
  n.w_x = tape.parameter(params.w_x);
  n.w_h = tape.parameter(params.w_h);
  n.b = tape.parameter(params.b);
  if (params.depth_gated) {
    n.w_dx = tape.parameter(params.w_dx);
    n.w_dc = tape.parameter(params.w_dc);
    n.w_dl = tape.parameter(params.w_dl);
    n.b_d = tape.parameter(params.b_d);
  }
  return n;
}

LstmLayerNodes bind_layer_frozen(Tape& tape, const LstmLayerParams& params) {
  LstmLayerNodes n;
  n.input = params.input;
  n.hidden = params.hidden;
  n.depth_gated = params.depth_gated;
  n.w_x = tape.constant(params.w_x.value);
  n.w_h = tape.constant(params.w_h.value);
  n.b = tape.constant(params.b.value);
  if (params.depth_gated) {
    n.w_dx = tape.constant(params.w_dx.value);
    n.w_dc = tape.constant(params.w_dc.value);
    n.w_dl = tape.constant(params.w_dl.value);
    n.b_d = tape.constant(params.b_d.value);
  }
  return n;
}

LstmStateNodes constant_state(Tape& tape, const LstmState& state) {
  LstmStateNodes nodes;
  nodes.reserve(state.size());
  for (const CellState& s : state) {
    nodes.push_back({tape.constant(s.h), tape.constant(s.c)});
  }
  return nodes;
}

LstmState state_values(const Tape& tape, const LstmStateNodes& state) {
  LstmState values;
  values.reserve(state.size());
  for (const CellNodes& s : state) {
    values.push_back({tape.value(s.h), tape.value(s.c)});
  }
  return values;
}

LstmStepResult lstm_step(Tape& tape, const LstmLayerNodes& layer, NodeRef x,
                         CellNodes prev, std::optional<NodeRef> c_below) {
  const std::size_t H = layer.hidden;
  const Tensor& xv = tape.value(x);
  if (xv.rows() != 1 || xv.cols() != layer.input) {
    throw DimensionError("lstm_step: input " + xv.shape_string() +
                         ", layer expects 1x" + std::to_string(layer.input));
  }
  for (NodeRef v : {prev.h, prev.c}) {
    const Tensor& t = tape.value(v);
    if (t.rows() != 1 || t.cols() != H) {
      throw DimensionError("lstm_step: state " + t.shape_string() +
                           ", layer expects 1x" + std::to_string(H));
    }
  }
  if (c_below.has_value() != layer.depth_gated) {
    throw ConfigurationError(
        layer.depth_gated ? "lstm_step: depth-gated layer needs c_below"
                          : "lstm_step: c_below given to a plain layer");
  }

  const NodeRef pre = tape.add(
      tape.add(tape.matmul_nt(x, layer.w_x), tape.matmul_nt(prev.h, layer.w_h)),
      layer.b);

  LstmStepResult r;
  r.input_gate = tape.sigmoid(tape.slice(pre, 0, H));
  r.forget_gate = tape.sigmoid(tape.slice(pre, H, H));
  r.output_gate = tape.sigmoid(tape.slice(pre, 2 * H, H));
  const NodeRef candidate = tape.tanh(tape.slice(pre, 3 * H, H));

  NodeRef c = tape.add(tape.mul(r.forget_gate, prev.c),
                       tape.mul(r.input_gate, candidate));
  if (layer.depth_gated) {
    const Tensor& below = tape.value(*c_below);
    if (below.rows() != 1 || below.cols() != H) {
      throw DimensionError("lstm_step: c_below " + below.shape_string() +
                           ", layer expects 1x" + std::to_string(H));
    }
    const NodeRef d_pre = tape.add(
        tape.add(tape.matmul_nt(x, layer.w_dx), layer.b_d),
        tape.add(tape.mul(layer.w_dc, prev.c), tape.mul(layer.w_dl, *c_below)));
    r.depth_gate = tape.sigmoid(d_pre);
    c = tape.add(c, tape.mul(r.depth_gate, *c_below));
  }
  r.cell.c = c;
  r.cell.h = tape.mul(r.output_gate, tape.tanh(c));
  return r;
}

LstmStateNodes stack_step(Tape& tape, std::span<const LstmLayerNodes> stack,
                          NodeRef x, const LstmStateNodes& prev) {
  if (stack.empty()) throw ConfigurationError("stack_step: empty stack");
  if (prev.size() != stack.size()) {
    throw ConfigurationError("stack_step: " + std::to_string(stack.size()) +
                             " layers but state has " +
                             std::to_string(prev.size()));
  }
  LstmStateNodes next;
  next.reserve(stack.size());
  NodeRef input = x;
  for (std::size_t l = 0; l < stack.size(); ++l) {
    std::optional<NodeRef> below;
    if (l > 0 && stack[l].depth_gated) below = next[l - 1].c;
    const LstmStepResult step = lstm_step(tape, stack[l], input, prev[l], below);
    next.push_back(step.cell);
    input = step.cell.h;
  }
  return next;
}

}  // namespace awi
