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

#ifndef RATEX_TOPK_HPP_
#define RATEX_TOPK_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ratex/rng.hpp"

namespace ratex {

/// Binary top-k% selection over one sequence.
struct RationaleMask {
  std::vector<std::uint8_t> bits;
  double k_percent = 0.0;
  std::size_t cardinality = 0;

  std::vector<double> AsDoubles() const { return {bits.begin(), bits.end()}; }
  bool operator==(const RationaleMask&) const = default;
};

/// max(1, round-half-up(k·n/100)).
std::size_t TopkCardinality(std::size_t n, double k_percent);

/// Ones at the `count` largest scores; ties go to the lower index.
std::vector<std::uint8_t> TopkByCount(std::span<const double> scores, std::size_t count);

/// Ones at the TopkCardinality(n, k) largest scores. Requires n >= 1,
/// 0 < k <= 100 and finite scores.
RationaleMask TopkMask(std::span<const double> scores, double k_percent);

/// -scale·ln(-ln u).
double GumbelFromUniform(double u, double scale);
std::vector<double> GumbelSample(std::size_t n, double scale, Rng& rng);

struct ImleConfig {
  double lambda = 1.0;
  double noise_scale = 1.0;  // 0 disables the perturbation
  std::size_t samples = 1;

  void Validate() const;
};

struct ImleEstimate {
  std::vector<double> grad_scores;
  /// Samples whose perturbed and target masks differed.
  std::size_t differing_samples = 0;
};

/// Perturb-and-MAP gradient of a loss w.r.t. the scores that produced a
/// top-k mask.
///
/// For each sample, draws Gumbel noise e and returns
///   topk(s + e) - topk(s - lambda·grad_r + e),
/// averaged over cfg.samples draws. The target moves the scores against
/// the downstream gradient, so a descent step on the estimate raises the
/// scores of tokens whose selection would lower the loss. Every
/// single-sample estimate lies in {-1,0,1}^n and sums to zero. With noise
/// disabled all samples coincide and one deterministic difference is used.
ImleEstimate ImleGradient(std::span<const double> scores, std::span<const double> grad_r,
                          std::size_t count, const ImleConfig& cfg, Rng& rng);
ImleEstimate ImleGradientPercent(std::span<const double> scores, std::span<const double> grad_r,
                                 double k_percent, const ImleConfig& cfg, Rng& rng);

struct AimleConfig {
  double initial_lambda = 1.0;
  double target_rate = 0.3;   // desired fraction of items whose masks change
  double step_factor = 0.1;
  double ema_decay = 0.9;
  double dead_band = 0.05;
  double initial_rate = 0.0;
  double min_lambda = 1e-6;
  double max_lambda = 1e6;
};

/// Adaptive step size for the IMLE target.
///
/// Tracks an exponential moving average of how often the target mask
/// differs from the perturbed mask and scales lambda multiplicatively
/// toward a configured change rate: too few changes mean the target step
/// is too small to flip any selection, too many mean it is overshooting.
/// alpha/beta hold the target-distribution initialization (1 and 0) and
/// are reported with the diagnostics.
class AimleController {
 public:
  explicit AimleController(const AimleConfig& cfg = {});

  /// One update from a batch of per-item change flags; returns the new
  /// lambda. An empty batch leaves everything unchanged.
  double Update(std::span<const std::uint8_t> masks_differed);

  double lambda() const { return lambda_; }
  double observed_rate() const { return ema_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  const AimleConfig& config() const { return cfg_; }

 private:
  AimleConfig cfg_;
  double lambda_;
  double ema_;
  double alpha_ = 1.0;
  double beta_ = 0.0;
};

}  // namespace ratex

#endif  // RATEX_TOPK_HPP_
