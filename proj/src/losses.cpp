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

#include "ratex/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ratex/error.hpp"
#include "ratex/model.hpp"

namespace ratex {
namespace {

ReducedInput Reduce(std::span<const int> tokens, const RationaleMask& r, bool keep_selected) {
  if (tokens.size() != r.bits.size())
    throw ContractViolation("reduced input: token and mask lengths differ");
  ReducedInput out;
  out.tokens.assign(tokens.begin(), tokens.end());
  out.attend.assign(tokens.size(), 1.0);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const bool selected = r.bits[i] != 0;
    if (selected != keep_selected) {
      out.tokens[i] = kMaskId;
      out.attend[i] = 0.0;
    }
  }
  return out;
}

double Mean(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

void LossWeights::Validate() const {
  for (double a : {alpha_c, alpha_s, alpha_p, margin_s, margin_c})
    if (!std::isfinite(a) || a < 0.0) throw ConfigError("loss: weights and margins must be finite and >= 0");
  if (k_set.empty()) throw ConfigError("loss: k-set must not be empty");
  for (double k : k_set)
    if (!(k > 0.0 && k <= 100.0)) throw ConfigError("loss: k values must lie in (0, 100]");
}

ReducedInput ContrastInput(std::span<const int> tokens, const RationaleMask& r) {
  return Reduce(tokens, r, /*keep_selected=*/false);
}

ReducedInput RationaleInput(std::span<const int> tokens, const RationaleMask& r) {
  return Reduce(tokens, r, /*keep_selected=*/true);
}

double SufficiencyLoss(double ce_rationale, double ce_full, double margin_s) {
  return std::max(-margin_s, ce_rationale - ce_full) + margin_s;
}

double ComprehensivenessLoss(double ce_full, double ce_contrast, double margin_c) {
  return std::max(-margin_c, ce_full - ce_contrast) + margin_c;
}

double PlausibilityLoss(std::span<const double> scores, std::span<const std::uint8_t> gold,
                        bool one_sided) {
  if (gold.empty() || gold.size() != scores.size())
    throw ContractViolation("plausibility loss: gold rationale absent or of wrong length");
  Tape tape;
  const NodeId s = tape.Constant(Tensor::Column({scores.begin(), scores.end()}));
  const std::vector<double> g(gold.begin(), gold.end());
  const std::vector<double> ones(gold.size(), 1.0);
  return tape.value(tape.BinaryCrossEntropyMasked(s, g, ones, one_sided)).values[0];
}

LossBreakdown TotalLoss(double task, std::span<const double> suff, std::span<const double> comp,
                        double plaus, const LossWeights& w) {
  if (w.k_set.empty()) throw ContractViolation("total loss: empty k-set");
  LossBreakdown b;
  b.task = task;
  b.suff.assign(suff.begin(), suff.end());
  b.comp.assign(comp.begin(), comp.end());
  b.plaus = plaus;
  double total = task;
  if (w.alpha_c > 0.0) {
    if (comp.empty()) throw ContractViolation("total loss: empty k-set");
    total += w.alpha_c * Mean(comp);
  }
  if (w.alpha_s > 0.0) {
    if (suff.empty()) throw ContractViolation("total loss: empty k-set");
    total += w.alpha_s * Mean(suff);
  }
  if (w.alpha_p > 0.0) total += w.alpha_p * plaus;
  for (double v : {task, plaus, total})
    if (!std::isfinite(v)) throw EvaluationError("total loss: non-finite component");
  b.total = total;
  return b;
}

NodeId MarginLoss(Tape& tape, NodeId diff, double margin) {
  return tape.Relu(tape.AddScalar(diff, margin));
}

}  // namespace ratex
