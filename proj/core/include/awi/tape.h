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

#ifndef AWI_TAPE_H_
#define AWI_TAPE_H_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "awi/tensor.h"

namespace awi {

// Index of a node on a Tape. Only meaningful for the tape that issued it.
struct NodeRef {
  static constexpr std::uint32_t kInvalid =
      std::numeric_limits<std::uint32_t>::max();

  std::uint32_t index = kInvalid;

  bool valid() const { return index != kInvalid; }
  friend bool operator==(NodeRef, NodeRef) = default;
};

// A trainable tensor that lives outside any tape. Tapes take a snapshot of
// `value` when the parameter is bound and add into `grad` on backward.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter() = default;
  Parameter(std::string n, std::size_t rows, std::size_t cols)
      : name(std::move(n)), value(rows, cols), grad(rows, cols) {}

  void zero_grad() { grad.fill(0.0); }
};

enum class OpKind : std::uint8_t {
  kConstant,
  kVariable,
  kParameter,
  kMatMul,
  kMatMulNT,
  kAdd,
  kSub,
  kMul,
  kTanh,
  kSigmoid,
  kSoftmax,
  kLogSoftmax,
  kLookup,
  kGather,
  kConcat,
  kSlice,
  kTranspose,
  kAddRowBroadcast,
  kSum,
  kPick,
  kScale,
};

const char* op_name(OpKind kind);

// The elementwise family accepted by Tape::elementwise.
enum class Elementwise : std::uint8_t { kAdd, kSub, kMul, kTanh, kSigmoid };

struct TapeNode {
  Tensor value;
  Tensor grad;
  OpKind op = OpKind::kConstant;
  std::vector<NodeRef> parents;
  bool requires_grad = false;
  // Row ids for lookup/gather, {begin} for slice, {flat index} for pick.
  std::vector<std::size_t> indices;
  double scalar = 0.0;
  Parameter* param = nullptr;
};

// Dynamic reverse-mode tape. Nodes are appended in evaluation order, which
// is therefore a topological order; backward walks it in reverse.
//
// Not thread-safe. Distinct tapes may run concurrently as long as any
// parameters they bind are not mutated meanwhile.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  // Leaves.
  NodeRef constant(Tensor value);
  NodeRef variable(Tensor value);
  NodeRef parameter(Parameter& param);

  // a * b.
  NodeRef matmul(NodeRef a, NodeRef b);
  // a * b^T; the usual form for x (1 x in) against W (out x in).
  NodeRef matmul_nt(NodeRef a, NodeRef b);

  NodeRef elementwise(Elementwise kind, std::span<const NodeRef> args);
  NodeRef add(NodeRef a, NodeRef b);
  NodeRef sub(NodeRef a, NodeRef b);
  NodeRef mul(NodeRef a, NodeRef b);
  NodeRef tanh(NodeRef x);
  NodeRef sigmoid(NodeRef x);

  // Vector softmax with max subtraction.
  NodeRef softmax(NodeRef x);
  NodeRef log_softmax(NodeRef x);

  // Row `index` of `table` as a 1 x cols node.
  NodeRef lookup(NodeRef table, std::size_t index);
  // Rows `ids` of `table` stacked into an ids.size() x cols node.
  NodeRef gather(NodeRef table, std::span<const std::size_t> ids);

  // Row-vector concatenation.
  NodeRef concat(NodeRef a, NodeRef b);
  // Columns [begin, begin + length) of a row vector.
  NodeRef slice(NodeRef x, std::size_t begin, std::size_t length);
  NodeRef transpose(NodeRef x);
  // x (m x n) plus row (1 x n) added to every row.
  NodeRef add_row_broadcast(NodeRef x, NodeRef row);
  // Sum of all elements as 1 x 1.
  NodeRef sum(NodeRef x);
  // Element `flat_index` of x as 1 x 1.
  NodeRef pick(NodeRef x, std::size_t flat_index);
  NodeRef scale(NodeRef x, double factor);

  // Resets every node gradient, seeds d(loss)/d(loss) = 1 and propagates in
  // decreasing index order. Gradients reaching parameter leaves are then
  // added into Parameter::grad, so parameters bound several times (or on
  // several tapes) accumulate.
  void backward(NodeRef loss);

  const Tensor& value(NodeRef ref) const { return node(ref).value; }
  const Tensor& grad(NodeRef ref) const { return node(ref).grad; }
  double scalar(NodeRef ref) const;
  const TapeNode& node(NodeRef ref) const;
  std::size_t size() const { return nodes_.size(); }

  void reserve(std::size_t n) { nodes_.reserve(n); }

 private:
  NodeRef push(TapeNode node);
  TapeNode& mutable_node(NodeRef ref);
  void check_ref(NodeRef ref) const;
  void propagate(const TapeNode& node);

  std::vector<TapeNode> nodes_;
};

}  // namespace awi

#endif  // AWI_TAPE_H_
