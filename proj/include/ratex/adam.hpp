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

#ifndef RATEX_ADAM_HPP_
#define RATEX_ADAM_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "ratex/autodiff.hpp"

namespace ratex {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  /// Learning rate used for fine-tuning a pretrained backbone; kept for
  /// reference, far too small for the from-scratch desk models.
  static AdamConfig FineTunePreset() { return AdamConfig{.lr = 2e-5}; }
};

struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::int64_t step = 0;
};

/// One bias-corrected Adam update. State is sized lazily on the first call.
/// A non-finite gradient rejects the whole step (EvaluationError) before any
/// parameter or moment is touched.
void AdamStep(std::span<Tensor* const> params, std::span<const std::vector<double>> grads,
              AdamState& state, const AdamConfig& cfg);

}  // namespace ratex

#endif  // RATEX_ADAM_HPP_
