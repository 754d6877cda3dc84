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

#ifndef RATEX_RNG_HPP_
#define RATEX_RNG_HPP_

#include <cstdint>
#include <random>
#include <string_view>

namespace ratex {

/// Seedable, platform-stable random source.
///
/// Wraps std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The std:: distributions are implementation-defined, so all
/// conversions to doubles and bounded integers are done here by hand.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Independent stream derived from a base seed and a label, so that
  /// e.g. data generation and weight init never share draws.
  static Rng Stream(std::uint64_t seed, std::string_view label);

  std::uint64_t NextU64() { return engine_(); }

  /// Uniform on the open interval (0, 1); never returns 0 or 1.
  double Uniform01Open() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform on [lo, hi).
  double Uniform(double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(engine_() >> 11) * 0x1.0p-53);
  }

  /// Uniform integer in [0, bound), rejection sampled (no modulo bias).
  std::uint64_t Below(std::uint64_t bound);

  /// Uniform integer in [lo, hi] inclusive.
  std::int64_t Between(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(Below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  /// Fisher-Yates shuffle.
  template <typename It>
  void Shuffle(It first, It last) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
      const std::uint64_t j = Below(i);
      std::swap(first[i - 1], first[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer; used to derive seeds.
std::uint64_t MixSeed(std::uint64_t x);

}  // namespace ratex

#endif  // RATEX_RNG_HPP_
