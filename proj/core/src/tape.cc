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

#include "awi/tape.h"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "awi/errors.h"

namespace awi {
namespace {

double sigmoid_value(double x) {
  // Split by sign so exp never overflows.
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::string shapes(const Tensor& a, const Tensor& b) {
  return a.shape_string() + " and " + b.shape_string();
}

bool is_row(const Tensor& t) { return t.rows() == 1; }

}  // namespace

const char* op_name(OpKind kind) {
  switch (kind) {
    case OpKind::kConstant: return "constant";
    case OpKind::kVariable: return "variable";
    case OpKind::kParameter: return "parameter";
    case OpKind::kMatMul: return "matmul";
    case OpKind::kMatMulNT: return "matmul_nt";
    case OpKind::kAdd: return "add";
    case OpKind::kSub: return "sub";
    case OpKind::kMul: return "mul";
    case OpKind::kTanh: return "tanh";
    case OpKind::kSigmoid: return "sigmoid";
    case OpKind::kSoftmax: return "softmax";
    case OpKind::kLogSoftmax: return "log_softmax";
    case OpKind::kLookup: return "lookup";
    case OpKind::kGather: return "gather";
    case OpKind::kConcat: return "concat";
    case OpKind::kSlice: return "slice";
    case OpKind::kTranspose: return "transpose";
    case OpKind::kAddRowBroadcast: return "add_row_broadcast";
    case OpKind::kSum: return "sum";
    case OpKind::kPick: return "pick";
    case OpKind::kScale: return "scale";
  }
  return "unknown";
}

void Tape::check_ref(NodeRef ref) const {
  if (!ref.valid() || ref.index >= nodes_.size()) {
    throw DomainError("node reference " + std::to_string(ref.index) +
                      " is not on this tape (size " +
                      std::to_string(nodes_.size()) + ")");
  }
}

const TapeNode& Tape::node(NodeRef ref) const {
  check_ref(ref);
  return nodes_[ref.index];
}

TapeNode& Tape::mutable_node(NodeRef ref) {
  check_ref(ref);
  return nodes_[ref.index];
}

double Tape::scalar(NodeRef ref) const {
  const Tensor& v = value(ref);
  if (v.size() != 1) {
    throw DimensionError("scalar() on " + v.shape_string() + " node");
  }
  return v[0];
}

NodeRef Tape::push(TapeNode node) {
  const auto index = static_cast<std::uint32_t>(nodes_.size());
  for (NodeRef p : node.parents) {
    // Parents must already exist: creation order is topological.
    assert(p.index < index);
    if (nodes_[p.index].requires_grad) node.requires_grad = true;
  }
  node.grad = Tensor(node.value.rows(), node.value.cols());
  nodes_.push_back(std::move(node));
  return NodeRef{index};
}

NodeRef Tape::constant(Tensor value) {
  TapeNode n;
  n.value = std::move(value);
  n.op = OpKind::kConstant;
  return push(std::move(n));
}

NodeRef Tape::variable(Tensor value) {
  TapeNode n;
  n.value = std::move(value);
  n.op = OpKind::kVariable;
  n.requires_grad = true;
  return push(std::move(n));
}

NodeRef Tape::parameter(Parameter& param) {
  TapeNode n;
  n.value = param.value;
  n.op = OpKind::kParameter;
  n.requires_grad = true;
  n.param = &param;
  return push(std::move(n));
}

NodeRef Tape::matmul(NodeRef a, NodeRef b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (A.cols() != B.rows()) {
    throw DimensionError("matmul: " + shapes(A, B));
  }
  Tensor C(A.rows(), B.cols());
  const std::size_t inner = A.cols();
  for (std::size_t i = 0; i < A.rows(); ++i) {
    double* c_row = &C(i, 0);
    for (std::size_t k = 0; k < inner; ++k) {
      const double a_ik = A(i, k);
      if (a_ik == 0.0) continue;
      const double* b_row = B.row(k).data();
      for (std::size_t j = 0; j < B.cols(); ++j) c_row[j] += a_ik * b_row[j];
    }
  }
  TapeNode n;
  n.value = std::move(C);
  n.op = OpKind::kMatMul;
  n.parents = {a, b};
  return push(std::move(n));
}

NodeRef Tape::matmul_nt(NodeRef a, NodeRef b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (A.cols() != B.cols()) {
    throw DimensionError("matmul_nt: " + shapes(A, B));
  }
  Tensor C(A.rows(), B.rows());
  const std::size_t inner = A.cols();
  for (std::size_t i = 0; i < A.rows(); ++i) {
    const double* a_row = A.row(i).data();
    for (std::size_t j = 0; j < B.rows(); ++j) {
      const double* b_row = B.row(j).data();
      double acc = 0.0;
      for (std::size_t k = 0; k < inner; ++k) acc += a_row[k] * b_row[k];
      C(i, j) = acc;
    }
  }
  TapeNode n;
  n.value = std::move(C);
  n.op = OpKind::kMatMulNT;
  n.parents = {a, b};
  return push(std::move(n));
}

NodeRef Tape::elementwise(Elementwise kind, std::span<const NodeRef> args) {
  const bool binary = kind == Elementwise::kAdd || kind == Elementwise::kSub ||
                      kind == Elementwise::kMul;
  if (args.size() != (binary ? 2u : 1u)) {
    throw DomainError("elementwise: wrong operand count " +
                      std::to_string(args.size()));
  }
  const Tensor& x = value(args[0]);
  Tensor out(x.rows(), x.cols());
  TapeNode n;
  if (binary) {
    const Tensor& y = value(args[1]);
    if (!x.same_shape(y)) {
      throw DimensionError("elementwise: " + shapes(x, y));
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
      switch (kind) {
        case Elementwise::kAdd: out[i] = x[i] + y[i]; break;
        case Elementwise::kSub: out[i] = x[i] - y[i]; break;
        default: out[i] = x[i] * y[i]; break;
      }
    }
    n.op = kind == Elementwise::kAdd   ? OpKind::kAdd
           : kind == Elementwise::kSub ? OpKind::kSub
                                       : OpKind::kMul;
    n.parents = {args[0], args[1]};
  } else {
    if (kind == Elementwise::kTanh) {
      for (std::size_t i = 0; i < x.size(); ++i) out[i] = std::tanh(x[i]);
      n.op = OpKind::kTanh;
    } else {
      for (std::size_t i = 0; i < x.size(); ++i) out[i] = sigmoid_value(x[i]);
      n.op = OpKind::kSigmoid;
    }
    n.parents = {args[0]};
  }
  n.value = std::move(out);
  return push(std::move(n));
}

NodeRef Tape::add(NodeRef a, NodeRef b) {
  const NodeRef args[] = {a, b};
  return elementwise(Elementwise::kAdd, args);
}

NodeRef Tape::sub(NodeRef a, NodeRef b) {
  const NodeRef args[] = {a, b};
  return elementwise(Elementwise::kSub, args);
}

NodeRef Tape::mul(NodeRef a, NodeRef b) {
  const NodeRef args[] = {a, b};
  return elementwise(Elementwise::kMul, args);
}

NodeRef Tape::tanh(NodeRef x) {
  const NodeRef args[] = {x};
  return elementwise(Elementwise::kTanh, args);
}

NodeRef Tape::sigmoid(NodeRef x) {
  const NodeRef args[] = {x};
  return elementwise(Elementwise::kSigmoid, args);
}

NodeRef Tape::softmax(NodeRef x) {
  const Tensor& in = value(x);
  if (!in.is_vector()) {
    throw DimensionError("softmax: expected a vector, got " +
                         in.shape_string());
  }
  if (in.empty()) throw DomainError("softmax: empty vector");
  Tensor out(in.rows(), in.cols());
  const double peak = *std::max_element(in.data().begin(), in.data().end());
  double total = 0.0;
  for (std::size_t i = 0; i < in.size(); ++i) {
    out[i] = std::exp(in[i] - peak);
    total += out[i];
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i] /= total;
  TapeNode n;
  n.value = std::move(out);
  n.op = OpKind::kSoftmax;
  n.parents = {x};
  return push(std::move(n));
}

NodeRef Tape::log_softmax(NodeRef x) {
  const Tensor& in = value(x);
  if (!in.is_vector()) {
    throw DimensionError("log_softmax: expected a vector, got " +
                         in.shape_string());
  }
  if (in.empty()) throw DomainError("log_softmax: empty vector");
  Tensor out(in.rows(), in.cols());
  const double peak = *std::max_element(in.data().begin(), in.data().end());
  double total = 0.0;
  for (std::size_t i = 0; i < in.size(); ++i) total += std::exp(in[i] - peak);
  const double log_z = peak + std::log(total);
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] - log_z;
  TapeNode n;
  n.value = std::move(out);
  n.op = OpKind::kLogSoftmax;
  n.parents = {x};
  return push(std::move(n));
}

NodeRef Tape::lookup(NodeRef table, std::size_t index) {
  const Tensor& t = value(table);
  if (index >= t.rows()) {
    throw VocabularyError("lookup: id " + std::to_string(index) +
                          " outside table of " + std::to_string(t.rows()) +
                          " rows");
  }
  TapeNode n;
  n.value = Tensor::Row(t.row(index));
  n.op = OpKind::kLookup;
  n.parents = {table};
  n.indices = {index};
  return push(std::move(n));
}

NodeRef Tape::gather(NodeRef table, std::span<const std::size_t> ids) {
  const Tensor& t = value(table);
  Tensor out(ids.size(), t.cols());
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] >= t.rows()) {
      throw VocabularyError("gather: id " + std::to_string(ids[r]) +
                            " outside table of " + std::to_string(t.rows()) +
                            " rows");
    }
    std::copy_n(t.row(ids[r]).begin(), t.cols(), out.row(r).begin());
  }
  TapeNode n;
  n.value = std::move(out);
  n.op = OpKind::kGather;
  n.parents = {table};
  n.indices.assign(ids.begin(), ids.end());
  return push(std::move(n));
}

NodeRef Tape::concat(NodeRef a, NodeRef b) {
  const Tensor& x = value(a);
  const Tensor& y = value(b);
  // An empty operand of either orientation is treated as a 1 x 0 row.
  const bool x_ok = is_row(x) || x.empty();
  const bool y_ok = is_row(y) || y.empty();
  if (!x_ok || !y_ok) {
    throw DimensionError("concat: expected row vectors, got " + shapes(x, y));
  }
  std::vector<double> data;
  data.reserve(x.size() + y.size());
  data.insert(data.end(), x.data().begin(), x.data().end());
  data.insert(data.end(), y.data().begin(), y.data().end());
  const std::size_t width = data.size();
  TapeNode n;
  n.value = Tensor(1, width, std::move(data));
  n.op = OpKind::kConcat;
  n.parents = {a, b};
  return push(std::move(n));
}

NodeRef Tape::slice(NodeRef x, std::size_t begin, std::size_t length) {
  const Tensor& in = value(x);
  if (!is_row(in)) {
    throw DimensionError("slice: expected a row vector, got " +
                         in.shape_string());
  }
  if (begin + length > in.cols()) {
    throw DimensionError("slice: [" + std::to_string(begin) + ", " +
                         std::to_string(begin + length) + ") of " +
                         in.shape_string());
  }
  TapeNode n;
  n.value = Tensor::Row(in.data().subspan(begin, length));
  n.op = OpKind::kSlice;
  n.parents = {x};
  n.indices = {begin};
  return push(std::move(n));
}

NodeRef Tape::transpose(NodeRef x) {
  const Tensor& in = value(x);
  Tensor out(in.cols(), in.rows());
  for (std::size_t r = 0; r < in.rows(); ++r) {
    for (std::size_t c = 0; c < in.cols(); ++c) out(c, r) = in(r, c);
  }
  TapeNode n;
  n.value = std::move(out);
  n.op = OpKind::kTranspose;
  n.parents = {x};
  return push(std::move(n));
}

NodeRef Tape::add_row_broadcast(NodeRef x, NodeRef row) {
  const Tensor& m = value(x);
  const Tensor& r = value(row);
  if (r.rows() != 1 || r.cols() != m.cols()) {
    throw DimensionError("add_row_broadcast: " + shapes(m, r));
  }
  Tensor out = m;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto dst = out.row(i);
    for (std::size_t j = 0; j < m.cols(); ++j) dst[j] += r[j];
  }
  TapeNode n;
  n.value = std::move(out);
  n.op = OpKind::kAddRowBroadcast;
  n.parents = {x, row};
  return push(std::move(n));
}

NodeRef Tape::sum(NodeRef x) {
  TapeNode n;
  n.value = Tensor(1, 1, value(x).sum());
  n.op = OpKind::kSum;
  n.parents = {x};
  return push(std::move(n));
}

NodeRef Tape::pick(NodeRef x, std::size_t flat_index) {
  const Tensor& in = value(x);
  if (flat_index >= in.size()) {
    throw VocabularyError("pick: index " + std::to_string(flat_index) +
                          " outside " + in.shape_string());
  }
  TapeNode n;
  n.value = Tensor(1, 1, in[flat_index]);
  n.op = OpKind::kPick;
  n.parents = {x};
  n.indices = {flat_index};
  return push(std::move(n));
}

NodeRef Tape::scale(NodeRef x, double factor) {
  Tensor out = value(x);
  for (double& v : out.data()) v *= factor;
  TapeNode n;
  n.value = std::move(out);
  n.op = OpKind::kScale;
  n.parents = {x};
  n.scalar = factor;
  return push(std::move(n));
}

void Tape::backward(NodeRef loss) {
  TapeNode& root = mutable_node(loss);
  if (root.value.size() != 1) {
    throw DimensionError("backward: loss must be 1x1, got " +
                         root.value.shape_string());
  }
  if (!root.value.all_finite()) {
    throw NumericError("backward: non-finite loss");
  }
  for (std::size_t i = 0; i <= loss.index; ++i) nodes_[i].grad.fill(0.0);

  std::vector<bool> reached(loss.index + 1, false);
  reached[loss.index] = true;
  root.grad[0] = 1.0;

  for (std::size_t i = loss.index + 1; i-- > 0;) {
    if (!reached[i]) continue;
    const TapeNode& n = nodes_[i];
    if (!n.requires_grad) continue;
    propagate(n);
    for (NodeRef p : n.parents) reached[p.index] = true;
  }

  for (std::size_t i = 0; i <= loss.index; ++i) {
    TapeNode& n = nodes_[i];
    if (n.op != OpKind::kParameter || !reached[i]) continue;
    Tensor& dst = n.param->grad;
    if (!dst.same_shape(n.grad)) dst = Tensor(n.grad.rows(), n.grad.cols());
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += n.grad[k];
  }
}

void Tape::propagate(const TapeNode& n) {
  const Tensor& dy = n.grad;
  const Tensor& y = n.value;
  auto parent = [&](std::size_t k) -> TapeNode& {
    return nodes_[n.parents[k].index];
  };

  switch (n.op) {
    case OpKind::kConstant:
    case OpKind::kVariable:
    case OpKind::kParameter:
      return;

    case OpKind::kMatMul: {
      TapeNode& pa = parent(0);
      TapeNode& pb = parent(1);
      const Tensor& A = pa.value;
      const Tensor& B = pb.value;
      if (pa.requires_grad) {
        // dA = dC * B^T
        for (std::size_t i = 0; i < A.rows(); ++i) {
          for (std::size_t k = 0; k < A.cols(); ++k) {
            double acc = 0.0;
            for (std::size_t j = 0; j < B.cols(); ++j) acc += dy(i, j) * B(k, j);
            pa.grad(i, k) += acc;
          }
        }
      }
      if (pb.requires_grad) {
        // dB = A^T * dC
        for (std::size_t i = 0; i < A.rows(); ++i) {
          for (std::size_t k = 0; k < A.cols(); ++k) {
            const double a_ik = A(i, k);
            if (a_ik == 0.0) continue;
            double* g = &pb.grad(k, 0);
            const double* d = dy.row(i).data();
            for (std::size_t j = 0; j < B.cols(); ++j) g[j] += a_ik * d[j];
          }
        }
      }
      return;
    }

    case OpKind::kMatMulNT: {
      TapeNode& pa = parent(0);
      TapeNode& pb = parent(1);
      const Tensor& A = pa.value;
      const Tensor& B = pb.value;
      const std::size_t inner = A.cols();
      for (std::size_t i = 0; i < A.rows(); ++i) {
        for (std::size_t j = 0; j < B.rows(); ++j) {
          const double d = dy(i, j);
          if (d == 0.0) continue;
          // dA += dC * B, dB += dC^T * A
          if (pa.requires_grad) {
            double* ga = &pa.grad(i, 0);
            const double* b_row = B.row(j).data();
            for (std::size_t k = 0; k < inner; ++k) ga[k] += d * b_row[k];
          }
          if (pb.requires_grad) {
            double* gb = &pb.grad(j, 0);
            const double* a_row = A.row(i).data();
            for (std::size_t k = 0; k < inner; ++k) gb[k] += d * a_row[k];
          }
        }
      }
      return;
    }

    case OpKind::kAdd:
    case OpKind::kSub: {
      const double sign = n.op == OpKind::kAdd ? 1.0 : -1.0;
      TapeNode& pa = parent(0);
      TapeNode& pb = parent(1);
      if (pa.requires_grad) {
        for (std::size_t i = 0; i < dy.size(); ++i) pa.grad[i] += dy[i];
      }
      if (pb.requires_grad) {
        for (std::size_t i = 0; i < dy.size(); ++i) pb.grad[i] += sign * dy[i];
      }
      return;
    }

    case OpKind::kMul: {
      TapeNode& pa = parent(0);
      TapeNode& pb = parent(1);
      if (pa.requires_grad) {
        for (std::size_t i = 0; i < dy.size(); ++i) {
          pa.grad[i] += dy[i] * pb.value[i];
        }
      }
      if (pb.requires_grad) {
        for (std::size_t i = 0; i < dy.size(); ++i) {
          pb.grad[i] += dy[i] * pa.value[i];
        }
      }
      return;
    }

    case OpKind::kTanh: {
      TapeNode& px = parent(0);
      for (std::size_t i = 0; i < dy.size(); ++i) {
        px.grad[i] += dy[i] * (1.0 - y[i] * y[i]);
      }
      return;
    }

    case OpKind::kSigmoid: {
      TapeNode& px = parent(0);
      for (std::size_t i = 0; i < dy.size(); ++i) {
        px.grad[i] += dy[i] * y[i] * (1.0 - y[i]);
      }
      return;
    }

    case OpKind::kSoftmax: {
      TapeNode& px = parent(0);
      double dot = 0.0;
      for (std::size_t i = 0; i < dy.size(); ++i) dot += dy[i] * y[i];
      for (std::size_t i = 0; i < dy.size(); ++i) {
        px.grad[i] += y[i] * (dy[i] - dot);
      }
      return;
    }

    case OpKind::kLogSoftmax: {
      TapeNode& px = parent(0);
      double total = 0.0;
      for (std::size_t i = 0; i < dy.size(); ++i) total += dy[i];
      for (std::size_t i = 0; i < dy.size(); ++i) {
        px.grad[i] += dy[i] - std::exp(y[i]) * total;
      }
      return;
    }

    case OpKind::kLookup: {
      TapeNode& table = parent(0);
      auto dst = table.grad.row(n.indices[0]);
      for (std::size_t j = 0; j < dy.size(); ++j) dst[j] += dy[j];
      return;
    }

    case OpKind::kGather: {
      TapeNode& table = parent(0);
      for (std::size_t r = 0; r < n.indices.size(); ++r) {
        auto dst = table.grad.row(n.indices[r]);
        auto src = dy.row(r);
        for (std::size_t j = 0; j < src.size(); ++j) dst[j] += src[j];
      }
      return;
    }

    case OpKind::kConcat: {
      TapeNode& pa = parent(0);
      TapeNode& pb = parent(1);
      const std::size_t na = pa.value.size();
      if (pa.requires_grad) {
        for (std::size_t i = 0; i < na; ++i) pa.grad[i] += dy[i];
      }
      if (pb.requires_grad) {
        for (std::size_t i = 0; i < pb.value.size(); ++i) {
          pb.grad[i] += dy[na + i];
        }
      }
      return;
    }

    case OpKind::kSlice: {
      TapeNode& px = parent(0);
      const std::size_t begin = n.indices[0];
      for (std::size_t i = 0; i < dy.size(); ++i) px.grad[begin + i] += dy[i];
      return;
    }

    case OpKind::kTranspose: {
      TapeNode& px = parent(0);
      for (std::size_t r = 0; r < dy.rows(); ++r) {
        for (std::size_t c = 0; c < dy.cols(); ++c) px.grad(c, r) += dy(r, c);
      }
      return;
    }

    case OpKind::kAddRowBroadcast: {
      TapeNode& pm = parent(0);
      TapeNode& pr = parent(1);
      if (pm.requires_grad) {
        for (std::size_t i = 0; i < dy.size(); ++i) pm.grad[i] += dy[i];
      }
      if (pr.requires_grad) {
        for (std::size_t r = 0; r < dy.rows(); ++r) {
          for (std::size_t c = 0; c < dy.cols(); ++c) pr.grad[c] += dy(r, c);
        }
      }
      return;
    }

    case OpKind::kSum: {
      TapeNode& px = parent(0);
      for (double& g : px.grad.data()) g += dy[0];
      return;
    }

    case OpKind::kPick: {
      parent(0).grad[n.indices[0]] += dy[0];
      return;
    }

    case OpKind::kScale: {
      TapeNode& px = parent(0);
      for (std::size_t i = 0; i < dy.size(); ++i) px.grad[i] += n.scalar * dy[i];
      return;
    }
  }
}

}  // namespace awi
