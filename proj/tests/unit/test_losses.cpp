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
#include "ratex/error.hpp"
#include "ratex/losses.hpp"
#include "ratex/model.hpp"
#include "ratex/rng.hpp"

using namespace ratex;

namespace {

RationaleMask Mask(std::vector<std::uint8_t> bits) {
  RationaleMask r;
  r.cardinality = 0;
  for (auto b : bits) r.cardinality += b;
  r.bits = std::move(bits);
  return r;
}

double Logit(double p) { return std::log(p / (1.0 - p)); }

}  // namespace

TEST_CASE("contrast input removes the rationale") {
  const std::vector<int> toks{10, 11, 12, 13};
  const ReducedInput c = ContrastInput(toks, Mask({0, 1, 1, 0}));
  CHECK(c.tokens == std::vector<int>{10, kMaskId, kMaskId, 13});
  CHECK(c.attend == std::vector<double>{1, 0, 0, 1});
  const ReducedInput id = ContrastInput(toks, Mask({0, 0, 0, 0}));
  CHECK(id.tokens == toks);

  ModelConfig mc;
  mc.vocab_size = 20;
  const ModelParams p = BuildModel(mc, 0);
  const ReducedInput all = ContrastInput(toks, Mask({1, 1, 1, 1}));
  CHECK_THROWS_AS(TaskForward(p, all.tokens, all.attend), DegenerateInput);
}

TEST_CASE("rationale input keeps only the rationale") {
  const std::vector<int> toks{10, 11, 12, 13};
  const RationaleMask r = Mask({1, 0, 0, 1});
  const ReducedInput k = RationaleInput(toks, r);
  CHECK(k.tokens == std::vector<int>{10, kMaskId, kMaskId, 13});
  CHECK(k.attend == std::vector<double>{1, 0, 0, 1});
  CHECK(RationaleInput(toks, Mask({1, 1, 1, 1})).tokens == toks);
  const ReducedInput c = ContrastInput(toks, r);
  for (std::size_t i = 0; i < toks.size(); ++i) CHECK(k.attend[i] + c.attend[i] == 1.0);
}

TEST_CASE("sufficiency margin") {
  CHECK(SufficiencyLoss(0.9, 0.7, 0.1) == doctest::Approx(0.3));
  CHECK(SufficiencyLoss(0.4, 0.7, 0.1) == 0.0);
  CHECK(SufficiencyLoss(0.65, 0.7, 0.1) == doctest::Approx(0.05));
}

TEST_CASE("comprehensiveness margin") {
  CHECK(ComprehensivenessLoss(0.7, 2.0, 0.2) == 0.0);
  CHECK(ComprehensivenessLoss(0.7, 0.7, 0.2) == doctest::Approx(0.2));
  CHECK(ComprehensivenessLoss(1.0, 0.5, 0.2) == doctest::Approx(0.7));
}

TEST_CASE("tape margin equals the max form exactly") {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double diff = rng.Uniform(-2, 2), m = rng.Uniform(0, 1);
    Tape t;
    const NodeId out = MarginLoss(t, t.Constant(Tensor::Scalar(diff)), m);
    CHECK(t.value(out).values[0] == std::max(-m, diff) + m);
  }
}

TEST_CASE("plausibility BCE") {
  const std::vector<std::uint8_t> gold{1, 0};
  CHECK(PlausibilityLoss(std::vector<double>{Logit(0.9), Logit(0.1)}, gold) ==
        doctest::Approx(0.1054).epsilon(1e-3));
  CHECK(PlausibilityLoss(std::vector<double>{60.0, -60.0}, gold) < 1e-6);
  CHECK(PlausibilityLoss(std::vector<double>{0.0, 0.0, 0.0}, std::vector<std::uint8_t>{1, 1, 0}) ==
        doctest::Approx(std::log(2.0)));
  // One-sided form only penalizes gold positions.
  CHECK(PlausibilityLoss(std::vector<double>{0.0, 30.0}, gold, true) ==
        doctest::Approx(std::log(2.0) / 2.0));
  CHECK_THROWS_AS(PlausibilityLoss(std::vector<double>{0.0}, gold), ContractViolation);
}

TEST_CASE("weighted total") {
  LossWeights w;
  w.alpha_c = w.alpha_s = 0.5;
  w.alpha_p = 1.0;
  const LossBreakdown b = TotalLoss(1.0, std::vector<double>{0.3}, std::vector<double>{0.2}, 0.4, w);
  CHECK(b.total == doctest::Approx(1.65));

  LossWeights zero;
  zero.alpha_c = zero.alpha_s = zero.alpha_p = 0.0;
  CHECK(TotalLoss(0.8, std::vector<double>{5.0}, std::vector<double>{5.0}, 5.0, zero).total == 0.8);

  LossWeights two;
  two.k_set = {20, 50};
  two.alpha_s = two.alpha_p = 0.0;
  const LossBreakdown k2 =
      TotalLoss(1.0, std::vector<double>{}, std::vector<double>{0.2, 0.6}, 0.0, two);
  CHECK(k2.total == doctest::Approx(1.4));

  CHECK_THROWS(TotalLoss(NAN, std::vector<double>{}, std::vector<double>{}, 0.0, zero));
  LossWeights bad;
  bad.alpha_p = -1.0;
  CHECK_THROWS_AS(bad.Validate(), ConfigError);
  bad = LossWeights{};
  bad.k_set.clear();
  CHECK_THROWS_AS(bad.Validate(), ConfigError);
}
