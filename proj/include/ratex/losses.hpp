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

#ifndef RATEX_LOSSES_HPP_
#define RATEX_LOSSES_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "ratex/autodiff.hpp"
#include "ratex/topk.hpp"

namespace ratex {

struct LossWeights {
  double alpha_c = 1.0;  // comprehensiveness
  double alpha_s = 1.0;  // sufficiency
  double alpha_p = 1.0;  // plausibility
  double margin_s = 0.1;
  double margin_c = 0.1;
  std::vector<double> k_set{50.0};
  bool plaus_one_sided = false;

  /// Sets alpha_c and alpha_s together.
  void SetFaithfulness(double alpha_f) { alpha_c = alpha_s = alpha_f; }
  bool UsesFaithfulness() const { return alpha_c > 0.0 || alpha_s > 0.0; }
  void Validate() const;
};

struct LossBreakdown {
  double task = 0.0;
  std::vector<double> suff;  // one per k in the k-set
  std::vector<double> comp;
  double plaus = 0.0;
  double total = 0.0;

  bool operator==(const LossBreakdown&) const = default;
};

/// Token ids and attend mask of a reduced input.
struct ReducedInput {
  std::vector<int> tokens;
  std::vector<double> attend;
};

/// x with its rationale removed: selected positions become MASK and are
/// excluded from attention.
ReducedInput ContrastInput(std::span<const int> tokens, const RationaleMask& r);
/// Only the rationale survives; every other position becomes MASK.
ReducedInput RationaleInput(std::span<const int> tokens, const RationaleMask& r);

/// max(-m, ce_rationale - ce_full) + m.
double SufficiencyLoss(double ce_rationale, double ce_full, double margin_s);
/// max(-m, ce_full - ce_contrast) + m.
double ComprehensivenessLoss(double ce_full, double ce_contrast, double margin_c);
/// Mean BCE between sigmoid(scores) and gold over all positions.
double PlausibilityLoss(std::span<const double> scores, std::span<const std::uint8_t> gold,
                        bool one_sided = false);

/// total = task + alpha_c·mean(comp) + alpha_s·mean(suff) + alpha_p·plaus.
/// suff/comp may be empty when the matching weight is zero.
LossBreakdown TotalLoss(double task, std::span<const double> suff, std::span<const double> comp,
                        double plaus, const LossWeights& w);

/// Tape form of the margin criteria: relu(diff + m), which equals
/// max(-m, diff) + m exactly.
NodeId MarginLoss(Tape& tape, NodeId diff, double margin);

}  // namespace ratex

#endif  // RATEX_LOSSES_HPP_
