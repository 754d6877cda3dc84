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

#ifndef RATEX_AUTODIFF_HPP_
#define RATEX_AUTODIFF_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace ratex {

/// Row-major matrix shape. Vectors are 1xN or Nx1, scalars 1x1.
struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t size() const { return rows * cols; }
  bool operator==(const Shape&) const = default;
};

/// Dense 64-bit array with a shape. values.size() == shape.size() always.
struct Tensor {
  Shape shape;
  std::vector<double> values;

  Tensor() = default;
  Tensor(Shape s, std::vector<double> v);
  explicit Tensor(Shape s) : shape(s), values(s.size(), 0.0) {}

  static Tensor Scalar(double v) { return Tensor({1, 1}, {v}); }
  static Tensor Row(std::vector<double> v);
  static Tensor Column(std::vector<double> v);
  static Tensor FromRows(std::initializer_list<std::initializer_list<double>> rows);

  double& at(std::size_t r, std::size_t c) { return values[r * shape.cols + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * shape.cols + c]; }
  std::size_t size() const { return values.size(); }

  bool operator==(const Tensor&) const = default;
};

/// Index of a node on one Tape. Not meaningful across tapes.
struct NodeId {
  std::uint32_t index = 0;
  bool operator==(const NodeId&) const = default;
};

enum class OpKind {
  kLeaf,
  kMatMul,
  kAdd,
  kMulScalar,
  kEmbedding,
  kMeanPoolMasked,
  kRowSoftmax,
  kSigmoid,
  kRelu,
  kConcatRows,
  kSelectRows,
  kSoftmaxCrossEntropy,
  kBinaryCrossEntropyMasked,
};

std::string_view OpName(OpKind kind);

class Tape;

/// Extra gradient injected into a node during the reverse sweep.
///
/// The callback runs when the sweep reaches `node`; at that point the
/// gradients of every node recorded after `node` are final and can be read
/// from the tape. The returned array is added to grad(node) before the
/// node's own op propagates it further. This is how a non-differentiable
/// step (top-k selection) gets a surrogate gradient spliced in.
struct GradientSplice {
  NodeId node;
  std::function<std::vector<double>(const Tape&)> extra;
};

/// Reverse-mode tape over a fixed op catalog.
///
/// Nodes are appended in creation order, which is a topological order.
/// Single-threaded; separate tapes share nothing.
class Tape {
 public:
  NodeId Leaf(Tensor value, bool requires_grad = true);
  NodeId Constant(Tensor value) { return Leaf(std::move(value), false); }

  /// a·b, or a·bᵀ when transpose_rhs is set.
  NodeId MatMul(NodeId a, NodeId b, bool transpose_rhs = false);
  /// Elementwise sum; b may also be a 1xC row broadcast over a's rows.
  NodeId Add(NodeId a, NodeId b);
  NodeId MulScalar(NodeId a, double c);
  /// Gathers table rows: out[i] = table[ids[i]].
  NodeId Embedding(NodeId table, std::span<const int> ids);
  /// Weighted row mean: sum_i m_i x_i / sum_i m_i. Differentiable in both x
  /// and the mask. Throws DegenerateInput when the mask sums to zero.
  NodeId MeanPoolMasked(NodeId x, NodeId mask);
  /// Row-wise softmax. With a mask (length cols, shared by all rows) the
  /// result is m_j exp(x_j) / sum_l m_l exp(x_l).
  NodeId RowSoftmax(NodeId x, std::optional<NodeId> mask = std::nullopt);
  NodeId Sigmoid(NodeId x);
  /// max(0, x); derivative at exactly 0 is 0.
  NodeId Relu(NodeId x);
  NodeId ConcatRows(std::span<const NodeId> parts);
  NodeId SelectRows(NodeId x, std::span<const std::size_t> rows);
  /// Mean over rows of -log softmax(logits)[target]. Returns 1x1.
  NodeId SoftmaxCrossEntropy(NodeId logits, std::span<const int> targets);
  /// Mean over positions with mask 1 of the BCE between sigmoid(logits)
  /// and targets. Probabilities are clamped to [1e-7, 1-1e-7]. With
  /// one_sided only the -g·log p term is kept.
  NodeId BinaryCrossEntropyMasked(NodeId logits, std::span<const double> targets,
                                  std::span<const double> mask, bool one_sided = false);

  // Composites built from the catalog above.
  NodeId Sum(NodeId x);
  NodeId AddScalar(NodeId x, double c);
  /// Mean of a list of 1x1 nodes.
  NodeId MeanOf(std::span<const NodeId> scalars);

  /// Reverse sweep from a 1x1 loss. Resets and fills every grad on the
  /// tape; nodes that do not reach the loss end with zero gradient.
  void Backward(NodeId loss, std::span<const GradientSplice> splices = {});

  const Tensor& value(NodeId id) const { return nodes_.at(id.index).value; }
  const Shape& shape(NodeId id) const { return nodes_.at(id.index).value.shape; }
  std::span<const double> grad(NodeId id) const { return nodes_.at(id.index).grad; }
  OpKind kind(NodeId id) const { return nodes_.at(id.index).kind; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    OpKind kind = OpKind::kLeaf;
    Tensor value;
    std::vector<double> grad;
    std::vector<NodeId> inputs;
    bool requires_grad = false;
    double scalar = 0.0;
    bool flag = false;
    std::vector<int> ints;
    std::vector<std::size_t> indices;
    std::vector<double> aux_a;  // saved activations / targets
    std::vector<double> aux_b;  // mask weights
  };

  NodeId Push(Node node);
  const Node& node(NodeId id) const;
  void Propagate(const Node& n);

  std::vector<Node> nodes_;
};

struct GradCheckReport {
  bool passed = false;
  double max_rel_error = 0.0;
  std::vector<double> analytic;
  std::vector<double> numeric;
};

/// f builds a scalar from a leaf holding x on a fresh tape.
using ScalarFunction = std::function<NodeId(Tape&, NodeId)>;

/// Compares Backward() against central differences coordinate-wise.
///
/// Error per coordinate is |a - n| / max(|a|, |n|, 1e-2); the floor keeps
/// near-zero components from blowing up the ratio. h must lie in
/// [1e-6, 1e-3]. Throws EvaluationError when f(x) is not finite.
GradCheckReport GradCheck(const ScalarFunction& f, const Tensor& x, double h, double tol);

}  // namespace ratex

#endif  // RATEX_AUTODIFF_HPP_
