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

#include "ratex/adam.hpp"

#include <cmath>
#include <string>

#include "ratex/error.hpp"

namespace ratex {

void AdamStep(std::span<Tensor* const> params, std::span<const std::vector<double>> grads,
              AdamState& state, const AdamConfig& cfg) {
  if (!(cfg.lr > 0.0)) throw ContractViolation("adam: lr must be positive");
  if (params.size() != grads.size()) throw ContractViolation("adam: params/grads count mismatch");
  if (state.m.empty() && state.step == 0) {
    for (const Tensor* p : params) {
      state.m.emplace_back(p->size(), 0.0);
      state.v.emplace_back(p->size(), 0.0);
    }
  }
  if (state.m.size() != params.size()) throw ContractViolation("adam: state does not match params");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].size() != params[i]->size() || state.m[i].size() != params[i]->size())
      throw ContractViolation("adam: shape mismatch for parameter " + std::to_string(i));
    for (double gv : grads[i])
      if (!std::isfinite(gv))
        throw EvaluationError("adam: non-finite gradient in parameter " + std::to_string(i) +
                              ", step rejected");
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    std::vector<double>& m = state.m[i];
    std::vector<double>& v = state.v[i];
    std::vector<double>& p = params[i]->values;
    const std::vector<double>& g = grads[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g[j];
      v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g[j] * g[j];
      const double mhat = m[j] / c1;
      const double vhat = v[j] / c2;
      p[j] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }
}

}  // namespace ratex
