// Copyright 2026 The ratex Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ratex/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ratex/error.hpp"

namespace ratex {
namespace {

constexpr double kProbClamp = 1e-7;

std::string ShapeStr(const Shape& s) {
  return "[" + std::to_string(s.rows) + "x" + std::to_string(s.cols) + "]";
}

void Require(bool ok, const std::string& what) {
  if (!ok) throw ContractViolation(what);
}

double StableSigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

std::string_view OpName(OpKind kind) {
  switch (kind) {
    case OpKind::kLeaf: return "leaf";
    case OpKind::kMatMul: return "matmul";
    case OpKind::kAdd: return "add";
    case OpKind::kMulScalar: return "mul-scalar";
    case OpKind::kEmbedding: return "embedding-lookup";
    case OpKind::kMeanPoolMasked: return "mean-pool-masked";
    case OpKind::kRowSoftmax: return "row-softmax";
    case OpKind::kSigmoid: return "sigmoid";
    case OpKind::kRelu: return "relu";
    case OpKind::kConcatRows: return "concat-rows";
    case OpKind::kSelectRows: return "select-rows";
    case OpKind::kSoftmaxCrossEntropy: return "softmax-cross-entropy";
    case OpKind::kBinaryCrossEntropyMasked: return "binary-cross-entropy-masked";
  }
  return "?";
}

Tensor::Tensor(Shape s, std::vector<double> v) : shape(s), values(std::move(v)) {
  Require(values.size() == shape.size(),
          "tensor: " + std::to_string(values.size()) + " values for shape " + ShapeStr(shape));
}

Tensor Tensor::Row(std::vector<double> v) {
  const Shape s{1, v.size()};
  return Tensor(s, std::move(v));
}

Tensor Tensor::Column(std::vector<double> v) {
  const Shape s{v.size(), 1};
  return Tensor(s, std::move(v));
}

Tensor Tensor::FromRows(std::initializer_list<std::initializer_list<double>> rows) {
  Tensor t;
  t.shape.rows = rows.size();
  t.shape.cols = rows.size() == 0 ? 0 : rows.begin()->size();
  for (const auto& r : rows) {
    Require(r.size() == t.shape.cols, "tensor: ragged rows");
    t.values.insert(t.values.end(), r.begin(), r.end());
  }
  return t;
}

NodeId Tape::Push(Node n) {
  n.grad.assign(n.value.size(), 0.0);
  if (n.kind != OpKind::kLeaf) {
    n.requires_grad = std::any_of(n.inputs.begin(), n.inputs.end(),
                                  [this](NodeId i) { return nodes_[i.index].requires_grad; });
  }
  nodes_.push_back(std::move(n));
  return NodeId{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

const Tape::Node& Tape::node(NodeId id) const {
  Require(id.index < nodes_.size(), "tape: node id out of range");
  return nodes_[id.index];
}

NodeId Tape::Leaf(Tensor value, bool requires_grad) {
  Node n;
  n.kind = OpKind::kLeaf;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  return Push(std::move(n));
}

NodeId Tape::MatMul(NodeId a, NodeId b, bool transpose_rhs) {
  const Tensor& A = node(a).value;
  const Tensor& B = node(b).value;
  const std::size_t m = A.shape.rows, k = A.shape.cols;
  const std::size_t bk = transpose_rhs ? B.shape.cols : B.shape.rows;
  const std::size_t n = transpose_rhs ? B.shape.rows : B.shape.cols;
  Require(k == bk, "matmul: " + ShapeStr(A.shape) + (transpose_rhs ? " x T" : " x ") +
                       ShapeStr(B.shape));
  Tensor out(Shape{m, n});
  if (!transpose_rhs) {
    for (std::size_t i = 0; i < m; ++i) {
      double* o = &out.values[i * n];
      for (std::size_t p = 0; p < k; ++p) {
        const double av = A.values[i * k + p];
        const double* brow = &B.values[p * n];
        for (std::size_t j = 0; j < n; ++j) o[j] += av * brow[j];
      }
    }
  } else {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t p = 0; p < k; ++p) acc += A.values[i * k + p] * B.values[j * k + p];
        out.values[i * n + j] = acc;
      }
    }
  }
  Node nd;
  nd.kind = OpKind::kMatMul;
  nd.value = std::move(out);
  nd.inputs = {a, b};
  nd.flag = transpose_rhs;
  return Push(std::move(nd));
}

NodeId Tape::Add(NodeId a, NodeId b) {
  const Tensor& A = node(a).value;
  const Tensor& B = node(b).value;
  const bool same = A.shape == B.shape;
  const bool broadcast = !same && B.shape.rows == 1 && B.shape.cols == A.shape.cols;
  Require(same || broadcast, "add: " + ShapeStr(A.shape) + " + " + ShapeStr(B.shape));
  Tensor out = A;
  if (same) {
    for (std::size_t i = 0; i < out.size(); ++i) out.values[i] += B.values[i];
  } else {
    const std::size_t c = A.shape.cols;
    for (std::size_t i = 0; i < out.size(); ++i) out.values[i] += B.values[i % c];
  }
  Node nd;
  nd.kind = OpKind::kAdd;
  nd.value = std::move(out);
  nd.inputs = {a, b};
  nd.flag = broadcast;
  return Push(std::move(nd));
}

NodeId Tape::MulScalar(NodeId a, double c) {
  Tensor out = node(a).value;
  for (double& v : out.values) v *= c;
  Node nd;
  nd.kind = OpKind::kMulScalar;
  nd.value = std::move(out);
  nd.inputs = {a};
  nd.scalar = c;
  return Push(std::move(nd));
}

NodeId Tape::Embedding(NodeId table, std::span<const int> ids) {
  const Tensor& T = node(table).value;
  const std::size_t d = T.shape.cols;
  Tensor out(Shape{ids.size(), d});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    Require(ids[i] >= 0 && static_cast<std::size_t>(ids[i]) < T.shape.rows,
            "embedding-lookup: id " + std::to_string(ids[i]) + " outside table of " +
                std::to_string(T.shape.rows) + " rows");
    std::copy_n(&T.values[static_cast<std::size_t>(ids[i]) * d], d, &out.values[i * d]);
  }
  Node nd;
  nd.kind = OpKind::kEmbedding;
  nd.value = std::move(out);
  nd.inputs = {table};
  nd.ints.assign(ids.begin(), ids.end());
  return Push(std::move(nd));
}

NodeId Tape::MeanPoolMasked(NodeId x, NodeId mask) {
  const Tensor& X = node(x).value;
  const Tensor& M = node(mask).value;
  Require(M.size() == X.shape.rows,
          "mean-pool-masked: mask of " + std::to_string(M.size()) + " for " + ShapeStr(X.shape));
  double weight = 0.0;
  for (double m : M.values) weight += m;
  if (!(weight > 0.0)) throw DegenerateInput("mean-pool-masked: mask selects no position");
  const std::size_t d = X.shape.cols;
  Tensor out(Shape{1, d});
  for (std::size_t i = 0; i < X.shape.rows; ++i) {
    const double m = M.values[i];
    if (m == 0.0) continue;
    for (std::size_t j = 0; j < d; ++j) out.values[j] += m * X.values[i * d + j];
  }
  for (double& v : out.values) v /= weight;
  Node nd;
  nd.kind = OpKind::kMeanPoolMasked;
  nd.value = std::move(out);
  nd.inputs = {x, mask};
  nd.scalar = weight;
  return Push(std::move(nd));
}

NodeId Tape::RowSoftmax(NodeId x, std::optional<NodeId> mask) {
  const Tensor& X = node(x).value;
  const std::size_t r = X.shape.rows, c = X.shape.cols;
  std::vector<double> w(c, 1.0);
  if (mask) {
    const Tensor& M = node(*mask).value;
    Require(M.size() == c, "row-softmax: mask of " + std::to_string(M.size()) + " for " +
                               ShapeStr(X.shape));
    w = M.values;
  }
  Tensor out(X.shape);
  std::vector<double> exps(r * c, 0.0);  // exp(x - rowmax), unweighted
  for (std::size_t i = 0; i < r; ++i) {
    double mx = -INFINITY;
    for (std::size_t j = 0; j < c; ++j)
      if (w[j] != 0.0) mx = std::max(mx, X.values[i * c + j]);
    if (!(mx > -INFINITY)) throw DegenerateInput("row-softmax: mask selects no column");
    double total = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      if (w[j] == 0.0) continue;
      exps[i * c + j] = std::exp(X.values[i * c + j] - mx);
      total += w[j] * exps[i * c + j];
    }
    for (std::size_t j = 0; j < c; ++j) {
      exps[i * c + j] /= total;  // now exp(x_j)/S
      out.values[i * c + j] = w[j] * exps[i * c + j];
    }
  }
  Node nd;
  nd.kind = OpKind::kRowSoftmax;
  nd.value = std::move(out);
  nd.inputs = {x};
  if (mask) nd.inputs.push_back(*mask);
  nd.aux_a = std::move(exps);
  return Push(std::move(nd));
}

NodeId Tape::Sigmoid(NodeId x) {
  Tensor out = node(x).value;
  for (double& v : out.values) v = StableSigmoid(v);
  Node nd;
  nd.kind = OpKind::kSigmoid;
  nd.value = std::move(out);
  nd.inputs = {x};
  return Push(std::move(nd));
}

NodeId Tape::Relu(NodeId x) {
  Tensor out = node(x).value;
  for (double& v : out.values) v = v > 0.0 ? v : 0.0;
  Node nd;
  nd.kind = OpKind::kRelu;
  nd.value = std::move(out);
  nd.inputs = {x};
  return Push(std::move(nd));
}

NodeId Tape::ConcatRows(std::span<const NodeId> parts) {
  Require(!parts.empty(), "concat-rows: no inputs");
  const std::size_t c = node(parts[0]).value.shape.cols;
  Tensor out;
  out.shape = Shape{0, c};
  for (NodeId p : parts) {
    const Tensor& P = node(p).value;
    Require(P.shape.cols == c, "concat-rows: column mismatch " + ShapeStr(P.shape));
    out.values.insert(out.values.end(), P.values.begin(), P.values.end());
    out.shape.rows += P.shape.rows;
  }
  Node nd;
  nd.kind = OpKind::kConcatRows;
  nd.value = std::move(out);
  nd.inputs.assign(parts.begin(), parts.end());
  return Push(std::move(nd));
}

NodeId Tape::SelectRows(NodeId x, std::span<const std::size_t> rows) {
  const Tensor& X = node(x).value;
  const std::size_t c = X.shape.cols;
  Tensor out(Shape{rows.size(), c});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    Require(rows[i] < X.shape.rows, "select-rows: row index out of range");
    std::copy_n(&X.values[rows[i] * c], c, &out.values[i * c]);
  }
  Node nd;
  nd.kind = OpKind::kSelectRows;
  nd.value = std::move(out);
  nd.inputs = {x};
  nd.indices.assign(rows.begin(), rows.end());
  return Push(std::move(nd));
}

NodeId Tape::SoftmaxCrossEntropy(NodeId logits, std::span<const int> targets) {
  const Tensor& L = node(logits).value;
  const std::size_t b = L.shape.rows, m = L.shape.cols;
  Require(targets.size() == b && b > 0,
          "softmax-cross-entropy: " + std::to_string(targets.size()) + " targets for " +
              ShapeStr(L.shape));
  std::vector<double> probs(b * m);
  double loss = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    Require(targets[i] >= 0 && static_cast<std::size_t>(targets[i]) < m,
            "softmax-cross-entropy: target " + std::to_string(targets[i]) + " not a class index");
    const double* row = &L.values[i * m];
    const double mx = *std::max_element(row, row + m);
    double total = 0.0;
    for (std::size_t j = 0; j < m; ++j) total += std::exp(row[j] - mx);
    const double lse = mx + std::log(total);
    for (std::size_t j = 0; j < m; ++j) probs[i * m + j] = std::exp(row[j] - lse);
    loss += lse - row[targets[i]];
  }
  Node nd;
  nd.kind = OpKind::kSoftmaxCrossEntropy;
  nd.value = Tensor::Scalar(loss / static_cast<double>(b));
  nd.inputs = {logits};
  nd.ints.assign(targets.begin(), targets.end());
  nd.aux_a = std::move(probs);
  return Push(std::move(nd));
}

NodeId Tape::BinaryCrossEntropyMasked(NodeId logits, std::span<const double> targets,
                                      std::span<const double> mask, bool one_sided) {
  const Tensor& X = node(logits).value;
  const std::size_t n = X.size();
  Require(targets.size() == n && mask.size() == n,
          "binary-cross-entropy-masked: length mismatch");
  double weight = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    Require(targets[i] == 0.0 || targets[i] == 1.0,
            "binary-cross-entropy-masked: targets must be 0 or 1");
    Require(mask[i] == 0.0 || mask[i] == 1.0, "binary-cross-entropy-masked: mask must be 0 or 1");
    weight += mask[i];
  }
  if (!(weight > 0.0)) throw DegenerateInput("binary-cross-entropy-masked: empty mask");
  std::vector<double> probs(n);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    probs[i] = StableSigmoid(X.values[i]);
    if (mask[i] == 0.0) continue;
    const double p = std::clamp(probs[i], kProbClamp, 1.0 - kProbClamp);
    const double g = targets[i];
    double l = -g * std::log(p);
    if (!one_sided) l -= (1.0 - g) * std::log(1.0 - p);
    loss += l;
  }
  Node nd;
  nd.kind = OpKind::kBinaryCrossEntropyMasked;
  nd.value = Tensor::Scalar(loss / weight);
  nd.inputs = {logits};
  nd.scalar = weight;
  nd.flag = one_sided;
  nd.aux_a.assign(targets.begin(), targets.end());
  nd.aux_b.assign(mask.begin(), mask.end());
  nd.indices.clear();
  nd.ints.clear();
  // probabilities are recomputed from the input in Propagate
  return Push(std::move(nd));
}

NodeId Tape::Sum(NodeId x) {
  const Shape s = shape(x);
  const NodeId left = Constant(Tensor(Shape{1, s.rows}, std::vector<double>(s.rows, 1.0)));
  const NodeId right = Constant(Tensor(Shape{s.cols, 1}, std::vector<double>(s.cols, 1.0)));
  return MatMul(MatMul(left, x), right);
}

NodeId Tape::AddScalar(NodeId x, double c) {
  const Shape s = shape(x);
  return Add(x, Constant(Tensor(s, std::vector<double>(s.size(), c))));
}

NodeId Tape::MeanOf(std::span<const NodeId> scalars) {
  Require(!scalars.empty(), "mean: no inputs");
  for (NodeId s : scalars) Require(shape(s) == (Shape{1, 1}), "mean: inputs must be 1x1");
  if (scalars.size() == 1) return scalars[0];
  return MulScalar(Sum(ConcatRows(scalars)), 1.0 / static_cast<double>(scalars.size()));
}

void Tape::Backward(NodeId loss, std::span<const GradientSplice> splices) {
  Require(loss.index < nodes_.size(), "backward: loss not on this tape");
  Require(nodes_[loss.index].value.shape == (Shape{1, 1}),
          "backward: loss must be scalar, got " + ShapeStr(nodes_[loss.index].value.shape));
  for (Node& n : nodes_) std::fill(n.grad.begin(), n.grad.end(), 0.0);
  nodes_[loss.index].grad[0] = 1.0;

  for (std::size_t idx = loss.index + 1; idx-- > 0;) {
    for (const GradientSplice& s : splices) {
      if (s.node.index != idx) continue;
      std::vector<double> extra = s.extra(*this);
      Require(extra.size() == nodes_[idx].grad.size(), "backward: splice gradient size mismatch");
      for (std::size_t i = 0; i < extra.size(); ++i) nodes_[idx].grad[i] += extra[i];
    }
    const Node& n = nodes_[idx];
    if (n.kind == OpKind::kLeaf || !n.requires_grad) continue;
    Propagate(n);
  }
}

void Tape::Propagate(const Node& n) {
  const std::vector<double>& g = n.grad;
  auto grad_of = [this](NodeId id) -> std::vector<double>* {
    Node& in = nodes_[id.index];
    return in.requires_grad ? &in.grad : nullptr;
  };

  switch (n.kind) {
    case OpKind::kLeaf:
      return;

    case OpKind::kMatMul: {
      const Tensor& A = nodes_[n.inputs[0].index].value;
      const Tensor& B = nodes_[n.inputs[1].index].value;
      const std::size_t m = A.shape.rows, k = A.shape.cols, c = n.value.shape.cols;
      if (auto* ga = grad_of(n.inputs[0])) {
        // dA = dC·Bᵀ (or dC·B when B was transposed)
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < c; ++j) {
            const double gv = g[i * c + j];
            if (gv == 0.0) continue;
            for (std::size_t p = 0; p < k; ++p)
              (*ga)[i * k + p] += gv * (n.flag ? B.values[j * k + p] : B.values[p * c + j]);
          }
      }
      if (auto* gb = grad_of(n.inputs[1])) {
        // dB = Aᵀ·dC (or dCᵀ·A)
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < c; ++j) {
            const double gv = g[i * c + j];
            if (gv == 0.0) continue;
            for (std::size_t p = 0; p < k; ++p) {
              const double contrib = gv * A.values[i * k + p];
              if (n.flag)
                (*gb)[j * k + p] += contrib;
              else
                (*gb)[p * c + j] += contrib;
            }
          }
      }
      return;
    }

    case OpKind::kAdd: {
      if (auto* ga = grad_of(n.inputs[0]))
        for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += g[i];
      if (auto* gb = grad_of(n.inputs[1])) {
        if (!n.flag) {
          for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i] += g[i];
        } else {
          const std::size_t c = n.value.shape.cols;
          for (std::size_t i = 0; i < g.size(); ++i) (*gb)[i % c] += g[i];
        }
      }
      return;
    }

    case OpKind::kMulScalar: {
      if (auto* ga = grad_of(n.inputs[0]))
        for (std::size_t i = 0; i < g.size(); ++i) (*ga)[i] += n.scalar * g[i];
      return;
    }

    case OpKind::kEmbedding: {
      if (auto* gt = grad_of(n.inputs[0])) {
        const std::size_t d = n.value.shape.cols;
        for (std::size_t i = 0; i < n.ints.size(); ++i) {
          const std::size_t row = static_cast<std::size_t>(n.ints[i]);
          for (std::size_t j = 0; j < d; ++j) (*gt)[row * d + j] += g[i * d + j];
        }
      }
      return;
    }

    case OpKind::kMeanPoolMasked: {
      const Tensor& X = nodes_[n.inputs[0].index].value;
      const Tensor& M = nodes_[n.inputs[1].index].value;
      const std::size_t d = X.shape.cols;
      const double w = n.scalar;
      if (auto* gx = grad_of(n.inputs[0])) {
        for (std::size_t i = 0; i < X.shape.rows; ++i) {
          const double m = M.values[i];
          if (m == 0.0) continue;
          for (std::size_t j = 0; j < d; ++j) (*gx)[i * d + j] += m * g[j] / w;
        }
      }
      if (auto* gm = grad_of(n.inputs[1])) {
        for (std::size_t i = 0; i < X.shape.rows; ++i) {
          double acc = 0.0;
          for (std::size_t j = 0; j < d; ++j) acc += g[j] * (X.values[i * d + j] - n.value.values[j]);
          (*gm)[i] += acc / w;
        }
      }
      return;
    }

    case OpKind::kRowSoftmax: {
      const std::size_t r = n.value.shape.rows, c = n.value.shape.cols;
      const std::vector<double>& y = n.value.values;
      std::vector<double> dots(r, 0.0);
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) dots[i] += y[i * c + j] * g[i * c + j];
      if (auto* gx = grad_of(n.inputs[0])) {
        for (std::size_t i = 0; i < r; ++i)
          for (std::size_t j = 0; j < c; ++j)
            (*gx)[i * c + j] += y[i * c + j] * (g[i * c + j] - dots[i]);
      }
      if (n.inputs.size() > 1) {
        if (auto* gm = grad_of(n.inputs[1])) {
          for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j)
              (*gm)[j] += n.aux_a[i * c + j] * (g[i * c + j] - dots[i]);
        }
      }
      return;
    }

    case OpKind::kSigmoid: {
      if (auto* gx = grad_of(n.inputs[0]))
        for (std::size_t i = 0; i < g.size(); ++i) {
          const double y = n.value.values[i];
          (*gx)[i] += g[i] * y * (1.0 - y);
        }
      return;
    }

    case OpKind::kRelu: {
      if (auto* gx = grad_of(n.inputs[0])) {
        const Tensor& X = nodes_[n.inputs[0].index].value;
        for (std::size_t i = 0; i < g.size(); ++i)
          if (X.values[i] > 0.0) (*gx)[i] += g[i];
      }
      return;
    }

    case OpKind::kConcatRows: {
      std::size_t offset = 0;
      for (NodeId in : n.inputs) {
        const std::size_t len = nodes_[in.index].value.size();
        if (auto* gi = grad_of(in))
          for (std::size_t i = 0; i < len; ++i) (*gi)[i] += g[offset + i];
        offset += len;
      }
      return;
    }

    case OpKind::kSelectRows: {
      if (auto* gx = grad_of(n.inputs[0])) {
        const std::size_t c = n.value.shape.cols;
        for (std::size_t i = 0; i < n.indices.size(); ++i)
          for (std::size_t j = 0; j < c; ++j) (*gx)[n.indices[i] * c + j] += g[i * c + j];
      }
      return;
    }

    case OpKind::kSoftmaxCrossEntropy: {
      if (auto* gl = grad_of(n.inputs[0])) {
        const std::size_t b = n.ints.size();
        const std::size_t m = n.aux_a.size() / b;
        const double scale = g[0] / static_cast<double>(b);
        for (std::size_t i = 0; i < b; ++i)
          for (std::size_t j = 0; j < m; ++j) {
            const double onehot = static_cast<int>(j) == n.ints[i] ? 1.0 : 0.0;
            (*gl)[i * m + j] += scale * (n.aux_a[i * m + j] - onehot);
          }
      }
      return;
    }

    case OpKind::kBinaryCrossEntropyMasked: {
      if (auto* gl = grad_of(n.inputs[0])) {
        const Tensor& X = nodes_[n.inputs[0].index].value;
        const double scale = g[0] / n.scalar;
        for (std::size_t i = 0; i < X.size(); ++i) {
          if (n.aux_b[i] == 0.0) continue;
          const double p = StableSigmoid(X.values[i]);
          if (p < kProbClamp || p > 1.0 - kProbClamp) continue;  // clamped: flat
          const double t = n.aux_a[i];
          const double d = n.flag ? -t * (1.0 - p) : p - t;
          (*gl)[i] += scale * d;
        }
      }
      return;
    }
  }
}

GradCheckReport GradCheck(const ScalarFunction& f, const Tensor& x, double h, double tol) {
  Require(h >= 1e-6 && h <= 1e-3, "grad_check: step must lie in [1e-6, 1e-3]");
  auto eval = [&f](const Tensor& at) {
    Tape tape;
    const NodeId leaf = tape.Leaf(at);
    const NodeId out = f(tape, leaf);
    const double v = tape.value(out).values.at(0);
    if (!std::isfinite(v)) throw EvaluationError("grad_check: f(x) is not finite");
    return v;
  };

  GradCheckReport report;
  {
    Tape tape;
    const NodeId leaf = tape.Leaf(x);
    const NodeId out = f(tape, leaf);
    if (!std::isfinite(tape.value(out).values.at(0)))
      throw EvaluationError("grad_check: f(x) is not finite");
    tape.Backward(out);
    const auto g = tape.grad(leaf);
    report.analytic.assign(g.begin(), g.end());
  }
  report.numeric.resize(x.size());
  Tensor probe = x;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double orig = probe.values[j];
    probe.values[j] = orig + h;
    const double up = eval(probe);
    probe.values[j] = orig - h;
    const double down = eval(probe);
    probe.values[j] = orig;
    report.numeric[j] = (up - down) / (2.0 * h);
    const double a = report.analytic[j], nm = report.numeric[j];
    const double denom = std::max({std::abs(a), std::abs(nm), 1e-2});
    report.max_rel_error = std::max(report.max_rel_error, std::abs(a - nm) / denom);
  }
  report.passed = report.max_rel_error <= tol;
  return report;
}

}  // namespace ratex
