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

#include "ratex/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "ratex/data.hpp"
#include "ratex/rng.hpp"
#include "ratex/training.hpp"

namespace ratex {
namespace {

Tensor Random(Rng& rng, Shape s, double lo = -1.0, double hi = 1.0) {
  Tensor t(s);
  for (double& v : t.values) v = rng.Uniform(lo, hi);
  return t;
}

// Values bounded away from zero so relu and friends stay off their kinks.
Tensor RandomOffZero(Rng& rng, Shape s) {
  Tensor t(s);
  for (double& v : t.values) {
    const double mag = rng.Uniform(0.1, 1.0);
    v = rng.Below(2) == 0 ? mag : -mag;
  }
  return t;
}

// c1ᵀ · out · c2 with random constant weights, so every entry of `out`
// reaches the scalar with its own coefficient.
NodeId Reduce(Tape& tape, NodeId out, Rng& rng) {
  const Shape s = tape.shape(out);
  const NodeId left = tape.Constant(Random(rng, {1, s.rows}));
  const NodeId right = tape.Constant(Random(rng, {s.cols, 1}));
  return tape.MatMul(tape.MatMul(left, out), right);
}

struct Case {
  OpKind kind;
  Tensor x;
  // Builds the output from the leaf; `rng` is reseeded identically for
  // every evaluation so constants agree across probes.
  std::function<NodeId(Tape&, NodeId, Rng&)> build;
};

}  // namespace

std::vector<CheckOutcome> CheckOpCatalog(std::uint64_t seed, double h, double tol) {
  Rng rng = Rng::Stream(seed, "gradcheck-ops");
  std::vector<Case> cases;

  cases.push_back({OpKind::kMatMul, Random(rng, {3, 4}), [](Tape& t, NodeId x, Rng& r) {
                     return t.MatMul(x, t.Constant(Random(r, {4, 2})));
                   }});
  cases.push_back({OpKind::kMatMul, Random(rng, {4, 2}), [](Tape& t, NodeId x, Rng& r) {
                     return t.MatMul(t.Constant(Random(r, {3, 4})), x);
                   }});
  cases.push_back({OpKind::kMatMul, Random(rng, {5, 4}), [](Tape& t, NodeId x, Rng& r) {
                     return t.MatMul(t.Constant(Random(r, {2, 4})), x, /*transpose_rhs=*/true);
                   }});
  cases.push_back({OpKind::kAdd, Random(rng, {3, 4}), [](Tape& t, NodeId x, Rng& r) {
                     return t.Add(x, t.Constant(Random(r, {3, 4})));
                   }});
  cases.push_back({OpKind::kAdd, Random(rng, {1, 4}), [](Tape& t, NodeId x, Rng& r) {
                     return t.Add(t.Constant(Random(r, {3, 4})), x);
                   }});
  cases.push_back({OpKind::kMulScalar, Random(rng, {2, 3}), [](Tape& t, NodeId x, Rng& r) {
                     return t.MulScalar(x, r.Uniform(-2.0, 2.0));
                   }});
  {
    std::vector<int> ids(7);
    for (int& id : ids) id = static_cast<int>(rng.Below(6));
    cases.push_back({OpKind::kEmbedding, Random(rng, {6, 3}), [ids](Tape& t, NodeId x, Rng&) {
                       return t.Embedding(x, ids);
                     }});
  }
  cases.push_back({OpKind::kMeanPoolMasked, Random(rng, {5, 3}), [](Tape& t, NodeId x, Rng& r) {
                     Tensor m = Random(r, {5, 1}, 0.0, 1.0);
                     m.values[0] = 0.0;
                     m.values[1] = 1.0;
                     return t.MeanPoolMasked(x, t.Constant(m));
                   }});
  cases.push_back({OpKind::kMeanPoolMasked, Random(rng, {5, 1}, 0.2, 1.0),
                   [](Tape& t, NodeId m, Rng& r) {
                     return t.MeanPoolMasked(t.Constant(Random(r, {5, 3})), m);
                   }});
  cases.push_back({OpKind::kRowSoftmax, Random(rng, {3, 4}, -2.0, 2.0),
                   [](Tape& t, NodeId x, Rng&) { return t.RowSoftmax(x); }});
  cases.push_back({OpKind::kRowSoftmax, Random(rng, {3, 5}, -2.0, 2.0),
                   [](Tape& t, NodeId x, Rng&) {
                     return t.RowSoftmax(x, t.Constant(Tensor::Column({1, 0, 1, 1, 0})));
                   }});
  cases.push_back({OpKind::kRowSoftmax, Random(rng, {5, 1}, 0.2, 1.0),
                   [](Tape& t, NodeId m, Rng& r) {
                     return t.RowSoftmax(t.Constant(Random(r, {2, 5}, -2.0, 2.0)), m);
                   }});
  cases.push_back({OpKind::kSigmoid, Random(rng, {3, 3}, -4.0, 4.0),
                   [](Tape& t, NodeId x, Rng&) { return t.Sigmoid(x); }});
  cases.push_back({OpKind::kRelu, RandomOffZero(rng, {3, 4}),
                   [](Tape& t, NodeId x, Rng&) { return t.Relu(x); }});
  cases.push_back({OpKind::kConcatRows, Random(rng, {2, 3}), [](Tape& t, NodeId x, Rng& r) {
                     const NodeId parts[] = {t.Constant(Random(r, {1, 3})), x, x};
                     return t.ConcatRows(parts);
                   }});
  cases.push_back({OpKind::kSelectRows, Random(rng, {4, 3}), [](Tape& t, NodeId x, Rng&) {
                     const std::size_t rows[] = {2, 0, 2, 3};
                     return t.SelectRows(x, rows);
                   }});
  {
    std::vector<int> targets(3);
    for (int& y : targets) y = static_cast<int>(rng.Below(4));
    cases.push_back({OpKind::kSoftmaxCrossEntropy, Random(rng, {3, 4}, -2.0, 2.0),
                     [targets](Tape& t, NodeId x, Rng&) {
                       return t.SoftmaxCrossEntropy(x, targets);
                     }});
  }
  for (bool one_sided : {false, true}) {
    std::vector<double> gold(6), mask(6);
    for (std::size_t i = 0; i < 6; ++i) {
      gold[i] = rng.Uniform(0.0, 1.0) < 0.5 ? 1.0 : 0.0;
      mask[i] = i == 0 ? 1.0 : (rng.Uniform(0.0, 1.0) < 0.8 ? 1.0 : 0.0);
    }
    gold[0] = 1.0;
    cases.push_back({OpKind::kBinaryCrossEntropyMasked, Random(rng, {6, 1}, -3.0, 3.0),
                     [gold, mask, one_sided](Tape& t, NodeId x, Rng&) {
                       return t.BinaryCrossEntropyMasked(x, gold, mask, one_sided);
                     }});
  }

  std::map<OpKind, CheckOutcome> by_kind;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const Case& c = cases[i];
    const std::uint64_t case_seed = MixSeed(seed * 1000 + i);
    const ScalarFunction f = [&c, case_seed](Tape& tape, NodeId x) {
      Rng r(case_seed);
      const NodeId out = c.build(tape, x, r);
      return tape.shape(out) == Shape{1, 1} ? out : Reduce(tape, out, r);
    };
    const GradCheckReport rep = GradCheck(f, c.x, h, tol);
    CheckOutcome& o = by_kind[c.kind];
    if (o.checks == 0) {
      o.name = std::string(OpName(c.kind));
      o.passed = true;
    }
    o.passed = o.passed && rep.passed;
    o.max_rel_error = std::max(o.max_rel_error, rep.max_rel_error);
    ++o.checks;
  }
  std::vector<CheckOutcome> out;
  for (auto& [kind, o] : by_kind) out.push_back(o);
  return out;
}

CheckOutcome CheckEndToEnd(std::uint64_t seed, EncoderKind encoder, Variant variant, double h,
                           double tol) {
  ModelConfig mc;
  mc.vocab_size = 30;
  mc.embed_dim = 4;
  mc.hidden_dim = 5;
  mc.num_classes = 3;
  mc.encoder = encoder;
  mc.variant = variant;
  const ModelParams params = BuildModel(mc, seed);

  SyntheticSpec spec;
  spec.vocab_size = mc.vocab_size;
  spec.num_classes = mc.num_classes;
  spec.seq_len_min = 6;
  spec.seq_len_max = 9;
  spec.span_len_min = 1;
  spec.span_len_max = 3;
  spec.signal_pool_size = 4;
  spec.num_examples = 3;
  spec.seed = seed;
  Dataset data = GenerateSynthetic(spec);
  data[2].rationale.reset();  // plausibility averages over gold examples only
  std::vector<const Example*> batch;
  for (const Example& ex : data) batch.push_back(&ex);

  LossWeights w;
  w.alpha_c = 0.7;
  w.alpha_s = 1.3;
  w.alpha_p = 0.5;
  w.k_set = {30.0, 50.0};

  MaskSet fixed;
  {
    Tape tape;
    const BoundModel bound = Bind(tape, params);
    fixed = BuildLossGraph(tape, params, bound, batch, w).masks;
  }

  CheckOutcome o;
  o.name = std::string("end-to-end/") + std::string(ToString(encoder)) + "/" +
           std::string(ToString(variant));
  o.passed = true;
  const auto tensors = params.Parameters();
  for (std::size_t p = 0; p < tensors.size(); ++p) {
    const ScalarFunction f = [&, p](Tape& tape, NodeId x) {
      const BoundModel bound = Bind(tape, params, std::make_pair(p, x));
      return BuildLossGraph(tape, params, bound, batch, w, &fixed).total;
    };
    const GradCheckReport rep = GradCheck(f, *tensors[p], h, tol);
    o.passed = o.passed && rep.passed;
    o.max_rel_error = std::max(o.max_rel_error, rep.max_rel_error);
    ++o.checks;
  }
  return o;
}

}  // namespace ratex
