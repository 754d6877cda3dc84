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

#include <cmath>
#include <vector>

#include "doctest.h"
#include "ratex/autodiff.hpp"
#include "ratex/error.hpp"
#include "ratex/gradcheck.hpp"

using namespace ratex;

TEST_CASE("forward ops on small inputs") {
  Tape t;
  const NodeId a = t.Leaf(Tensor::FromRows({{1, 2}, {3, 4}}));
  const NodeId eye = t.Constant(Tensor::FromRows({{1, 0}, {0, 1}}));
  CHECK(t.value(t.MatMul(a, eye)) == Tensor::FromRows({{1, 2}, {3, 4}}));
  CHECK(t.value(t.Sigmoid(t.Constant(Tensor::Row({0.0})))).values[0] == 0.5);
  const int target[] = {1};
  const NodeId ce = t.SoftmaxCrossEntropy(t.Constant(Tensor::Row({0, 0, 0})), target);
  CHECK(t.value(ce).values[0] == doctest::Approx(std::log(3.0)).epsilon(1e-12));
}

TEST_CASE("transpose and broadcast shapes") {
  Tape t;
  const NodeId a = t.Constant(Tensor::FromRows({{1, 2, 3}}));
  const NodeId b = t.Constant(Tensor::FromRows({{1, 0, 1}, {0, 1, 0}}));
  CHECK(t.value(t.MatMul(a, b, true)) == Tensor::FromRows({{4, 2}}));
  const NodeId bias = t.Constant(Tensor::Row({10, 20, 30}));
  CHECK(t.value(t.Add(b, bias)) == Tensor::FromRows({{11, 20, 31}, {10, 21, 30}}));
  CHECK_THROWS_AS(t.Add(b, t.Constant(Tensor::Row({1, 2}))), ContractViolation);
  CHECK_THROWS_AS(t.MatMul(b, b), ContractViolation);
}

TEST_CASE("backward: linear and quadratic") {
  Tape t;
  const NodeId x = t.Leaf(Tensor::Row({1, 2, 3}));
  t.Backward(t.Sum(x));
  CHECK(std::vector<double>(t.grad(x).begin(), t.grad(x).end()) == std::vector<double>{1, 1, 1});

  Tape q;
  const NodeId y = q.Leaf(Tensor::Scalar(3.0));
  q.Backward(q.MatMul(y, y));
  CHECK(q.grad(y)[0] == 6.0);
}

TEST_CASE("softmax cross-entropy gradient is softmax minus one-hot") {
  Tape t;
  const NodeId z = t.Leaf(Tensor::Row({1, 2, 3}));
  const int target[] = {2};
  t.Backward(t.SoftmaxCrossEntropy(z, target));
  CHECK(t.grad(z)[0] == doctest::Approx(0.0900).epsilon(1e-3));
  CHECK(t.grad(z)[1] == doctest::Approx(0.2447).epsilon(1e-3));
  CHECK(t.grad(z)[2] == doctest::Approx(-0.3348).epsilon(1e-3));
  double sum = 0.0;
  for (double g : t.grad(z)) sum += g;
  CHECK(std::abs(sum) < 1e-15);
}

TEST_CASE("relu derivative at zero is zero") {
  Tape t;
  const NodeId x = t.Leaf(Tensor::Row({-1.0, 0.0, 2.0}));
  t.Backward(t.Sum(t.Relu(x)));
  CHECK(t.grad(x)[0] == 0.0);
  CHECK(t.grad(x)[1] == 0.0);
  CHECK(t.grad(x)[2] == 1.0);
}

TEST_CASE("masked ops") {
  Tape t;
  const NodeId x = t.Constant(Tensor::FromRows({{1, 10}, {3, 20}, {100, 100}}));
  const NodeId m = t.Constant(Tensor::Column({1, 1, 0}));
  CHECK(t.value(t.MeanPoolMasked(x, m)) == Tensor::FromRows({{2, 15}}));
  CHECK_THROWS_AS(t.MeanPoolMasked(x, t.Constant(Tensor::Column({0, 0, 0}))), DegenerateInput);

  const NodeId s = t.RowSoftmax(t.Constant(Tensor::Row({0.0, 50.0, 0.0})),
                                t.Constant(Tensor::Column({1, 0, 1})));
  CHECK(t.value(s).values[0] == doctest::Approx(0.5));
  CHECK(t.value(s).values[1] == 0.0);
}

TEST_CASE("backward requires a scalar loss") {
  Tape t;
  const NodeId x = t.Leaf(Tensor::Row({1, 2}));
  CHECK_THROWS_AS(t.Backward(x), ContractViolation);
}

TEST_CASE("gradient splice adds to the node gradient before it propagates") {
  Tape t;
  const NodeId x = t.Leaf(Tensor::Row({1, 2}));
  const NodeId y = t.MulScalar(x, 3.0);
  const GradientSplice splice{y, [](const Tape&) { return std::vector<double>{10.0, -10.0}; }};
  t.Backward(t.Sum(y), std::span<const GradientSplice>(&splice, 1));
  CHECK(t.grad(x)[0] == doctest::Approx(33.0));
  CHECK(t.grad(x)[1] == doctest::Approx(-27.0));
}

TEST_CASE("grad check oracles") {
  const ScalarFunction squares = [](Tape& t, NodeId x) { return t.MatMul(x, x, true); };
  const GradCheckReport r = GradCheck(squares, Tensor::Row({1.0, -2.0}), 1e-5, 1e-4);
  CHECK(r.passed);
  CHECK(r.analytic[0] == doctest::Approx(2.0));
  CHECK(r.analytic[1] == doctest::Approx(-4.0));

  const ScalarFunction constant = [](Tape& t, NodeId) { return t.Constant(Tensor::Scalar(7.0)); };
  const GradCheckReport c = GradCheck(constant, Tensor::Row({1.0, 2.0}), 1e-5, 1e-4);
  CHECK(c.passed);
  CHECK(c.analytic == std::vector<double>{0.0, 0.0});
  CHECK(c.numeric == std::vector<double>{0.0, 0.0});

  CHECK_THROWS_AS(GradCheck(squares, Tensor::Row({1.0}), 1e-2, 1e-4), ContractViolation);
  const ScalarFunction bad = [](Tape& t, NodeId) { return t.Constant(Tensor::Scalar(NAN)); };
  CHECK_THROWS_AS(GradCheck(bad, Tensor::Row({1.0}), 1e-5, 1e-4), EvaluationError);
}

TEST_CASE("op catalog passes finite differences") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto outcomes = CheckOpCatalog(seed, 1e-5, 1e-4);
    CHECK(outcomes.size() == 12);
    for (const CheckOutcome& o : outcomes) {
      INFO(o.name << " seed " << seed << " err " << o.max_rel_error);
      CHECK(o.passed);
    }
  }
}

TEST_CASE("full objective passes finite differences with masks held fixed") {
  for (auto enc : {EncoderKind::kMeanPoolMlp, EncoderKind::kSingleHeadAttention}) {
    for (auto var : {Variant::kShared, Variant::kDual}) {
      const CheckOutcome o = CheckEndToEnd(3, enc, var, 1e-5, 1e-4);
      INFO(o.name << " err " << o.max_rel_error);
      CHECK(o.passed);
    }
  }
}
