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

#include "ratex/topk.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ratex/error.hpp"

namespace ratex {

std::size_t TopkCardinality(std::size_t n, double k_percent) {
  if (n == 0) throw ContractViolation("topk: empty sequence");
  if (!(k_percent > 0.0 && k_percent <= 100.0))
    throw ContractViolation("topk: k-percent must lie in (0, 100], got " + std::to_string(k_percent));
  // The epsilon absorbs representation error in products like 0.3·50 so
  // that exact halves round up.
  const double exact = k_percent * static_cast<double>(n) / 100.0;
  const auto c = static_cast<std::size_t>(std::floor(exact + 0.5 + 1e-9));
  return std::clamp<std::size_t>(c, 1, n);
}

std::vector<std::uint8_t> TopkByCount(std::span<const double> scores, std::size_t count) {
  for (double s : scores)
    if (!std::isfinite(s)) throw ContractViolation("topk: non-finite score");
  if (count > scores.size()) throw ContractViolation("topk: count exceeds sequence length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      return scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
                    });
  std::vector<std::uint8_t> bits(scores.size(), 0);
  for (std::size_t i = 0; i < count; ++i) bits[order[i]] = 1;
  return bits;
}

RationaleMask TopkMask(std::span<const double> scores, double k_percent) {
  RationaleMask m;
  m.k_percent = k_percent;
  m.cardinality = TopkCardinality(scores.size(), k_percent);
  m.bits = TopkByCount(scores, m.cardinality);
  return m;
}

double GumbelFromUniform(double u, double scale) {
  if (!(u > 0.0 && u < 1.0)) throw ContractViolation("gumbel: u must lie in (0, 1)");
  return -scale * std::log(-std::log(u));
}

std::vector<double> GumbelSample(std::size_t n, double scale, Rng& rng) {
  if (!(scale >= 0.0)) throw ContractViolation("gumbel: scale must be >= 0");
  std::vector<double> out(n, 0.0);
  if (scale == 0.0) return out;
  for (double& v : out) v = GumbelFromUniform(rng.Uniform01Open(), scale);
  return out;
}

void ImleConfig::Validate() const {
  if (!std::isfinite(lambda) || lambda < 0.0) throw ConfigError("imle: lambda must be finite and >= 0");
  if (!std::isfinite(noise_scale) || noise_scale < 0.0)
    throw ConfigError("imle: noise scale must be finite and >= 0");
  if (samples < 1) throw ConfigError("imle: samples must be >= 1");
}

ImleEstimate ImleGradient(std::span<const double> scores, std::span<const double> grad_r,
                          std::size_t count, const ImleConfig& cfg, Rng& rng) {
  cfg.Validate();
  const std::size_t n = scores.size();
  if (grad_r.size() != n) throw ContractViolation("imle: score and gradient lengths differ");
  ImleEstimate est;
  est.grad_scores.assign(n, 0.0);
  const std::size_t draws = cfg.noise_scale == 0.0 ? 1 : cfg.samples;
  std::vector<double> perturbed(n), target(n);
  for (std::size_t s = 0; s < draws; ++s) {
    const std::vector<double> eps = GumbelSample(n, cfg.noise_scale, rng);
    for (std::size_t i = 0; i < n; ++i) {
      perturbed[i] = scores[i] + eps[i];
      target[i] = scores[i] - cfg.lambda * grad_r[i] + eps[i];
    }
    const auto a = TopkByCount(perturbed, count);
    const auto b = TopkByCount(target, count);
    if (a != b) ++est.differing_samples;
    for (std::size_t i = 0; i < n; ++i)
      est.grad_scores[i] += static_cast<double>(a[i]) - static_cast<double>(b[i]);
  }
  if (draws > 1)
    for (double& g : est.grad_scores) g /= static_cast<double>(draws);
  return est;
}

ImleEstimate ImleGradientPercent(std::span<const double> scores, std::span<const double> grad_r,
                                 double k_percent, const ImleConfig& cfg, Rng& rng) {
  return ImleGradient(scores, grad_r, TopkCardinality(scores.size(), k_percent), cfg, rng);
}

AimleController::AimleController(const AimleConfig& cfg)
    : cfg_(cfg),
      lambda_(std::clamp(cfg.initial_lambda, cfg.min_lambda, cfg.max_lambda)),
      ema_(std::clamp(cfg.initial_rate, 0.0, 1.0)) {
  if (!(cfg.min_lambda > 0.0) || cfg.max_lambda < cfg.min_lambda)
    throw ConfigError("aimle: invalid lambda bounds");
  if (!(cfg.step_factor >= 0.0)) throw ConfigError("aimle: step factor must be >= 0");
  if (!(cfg.ema_decay >= 0.0 && cfg.ema_decay < 1.0))
    throw ConfigError("aimle: ema decay must lie in [0, 1)");
}

double AimleController::Update(std::span<const std::uint8_t> masks_differed) {
  if (masks_differed.empty()) return lambda_;
  double rate = 0.0;
  for (std::uint8_t f : masks_differed) rate += f ? 1.0 : 0.0;
  rate /= static_cast<double>(masks_differed.size());
  ema_ = std::clamp(cfg_.ema_decay * ema_ + (1.0 - cfg_.ema_decay) * rate, 0.0, 1.0);
  const double gap = ema_ - cfg_.target_rate;
  if (std::abs(gap) <= cfg_.dead_band) return lambda_;
  if (gap < 0.0)
    lambda_ *= 1.0 + cfg_.step_factor;
  else
    lambda_ /= 1.0 + cfg_.step_factor;
  lambda_ = std::clamp(lambda_, cfg_.min_lambda, cfg_.max_lambda);
  return lambda_;
}

}  // namespace ratex
