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
#include "ratex/adam.hpp"
#include "ratex/error.hpp"

using namespace ratex;

TEST_CASE("one bias-corrected step moves by lr") {
  Tensor p = Tensor::Scalar(0.0);
  Tensor* params[] = {&p};
  const std::vector<std::vector<double>> grads{{1.0}};
  AdamState state;
  AdamStep(params, grads, state, AdamConfig{.lr = 0.1});
  CHECK(p.values[0] == doctest::Approx(-0.1).epsilon(1e-7));
  CHECK(state.step == 1);
}

TEST_CASE("zero gradient leaves params and decays moments") {
  Tensor p = Tensor::Row({1.0, -2.0});
  Tensor* params[] = {&p};
  AdamState state;
  AdamStep(params, std::vector<std::vector<double>>{{0.5, 0.5}}, state, AdamConfig{});
  const Tensor after_first = p;
  const double m0 = state.m[0][0], v0 = state.v[0][0];
  AdamStep(params, std::vector<std::vector<double>>{{0.0, 0.0}}, state, AdamConfig{});
  CHECK(state.m[0][0] == doctest::Approx(0.9 * m0));
  CHECK(state.v[0][0] == doctest::Approx(0.999 * v0));
  // A pure zero-gradient state never moves the parameters.
  Tensor q = Tensor::Row({3.0});
  Tensor* qs[] = {&q};
  AdamState fresh;
  AdamStep(qs, std::vector<std::vector<double>>{{0.0}}, fresh, AdamConfig{});
  CHECK(q.values[0] == 3.0);
  CHECK(fresh.m[0][0] == 0.0);
  CHECK(after_first.values[0] != 1.0);
}

TEST_CASE("identical state and inputs give identical outputs") {
  Tensor a = Tensor::Row({0.3, -0.7}), b = a;
  Tensor* pa[] = {&a};
  Tensor* pb[] = {&b};
  AdamState sa, sb;
  const std::vector<std::vector<double>> g{{0.11, -2.5}};
  for (int i = 0; i < 5; ++i) {
    AdamStep(pa, g, sa, AdamConfig{});
    AdamStep(pb, g, sb, AdamConfig{});
  }
  CHECK(a == b);
  CHECK(sa.m == sb.m);
  CHECK(sa.v == sb.v);
}

TEST_CASE("non-finite gradients reject the whole step") {
  Tensor a = Tensor::Row({1.0}), b = Tensor::Row({2.0});
  Tensor* ps[] = {&a, &b};
  AdamState state;
  const std::vector<std::vector<double>> g{{1.0}, {NAN}};
  CHECK_THROWS_AS(AdamStep(ps, g, state, AdamConfig{}), EvaluationError);
  CHECK(a.values[0] == 1.0);
  CHECK(b.values[0] == 2.0);
  CHECK(state.step == 0);
  CHECK_THROWS_AS(AdamStep(ps, std::vector<std::vector<double>>{{1.0}, {1.0}}, state,
                           AdamConfig{.lr = 0.0}),
                  ContractViolation);
}

TEST_CASE("fine-tune preset") { CHECK(AdamConfig::FineTunePreset().lr == 2e-5); }
