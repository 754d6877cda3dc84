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

#ifndef RATEX_GRADCHECK_HPP_
#define RATEX_GRADCHECK_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ratex/autodiff.hpp"
#include "ratex/model.hpp"

namespace ratex {

struct CheckOutcome {
  std::string name;
  bool passed = false;
  double max_rel_error = 0.0;
  std::size_t checks = 0;  // individual GradCheck calls folded in
};

/// Finite-difference checks of every differentiable op kind on random
/// inputs drawn from `seed`. Each op is exercised in all its argument
/// roles (lhs/rhs, broadcast, mask input, one-sided BCE, ...).
std::vector<CheckOutcome> CheckOpCatalog(std::uint64_t seed, double h, double tol);

/// Checks the full training objective (task, both margin criteria over
/// two k values, plausibility) with respect to every parameter tensor of a
/// small random model, holding the rationale masks fixed.
CheckOutcome CheckEndToEnd(std::uint64_t seed, EncoderKind encoder, Variant variant, double h,
                           double tol);

}  // namespace ratex

#endif  // RATEX_GRADCHECK_HPP_
