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

#ifndef RATEX_DATA_HPP_
#define RATEX_DATA_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ratex {

struct Example {
  std::string id;
  std::vector<int> tokens;
  int label = 0;
  /// Gold rationale; absent for corpora without human highlights.
  std::optional<std::vector<std::uint8_t>> rationale;

  bool operator==(const Example&) const = default;
};

using Dataset = std::vector<Example>;

/// Throws DataError describing the first broken invariant.
void ValidateExample(const Example& ex, std::size_t num_classes);

/// Planted-rationale corpus.
///
/// Token ids: [0, 2) reserved, then one signal pool of signal_pool_size ids
/// per class, then the noise pool (everything left below vocab_size). Each
/// example plants span_len signal tokens of its class, contiguous unless
/// scatter is set, and fills every other position from the noise pool.
struct SyntheticSpec {
  std::size_t vocab_size = 200;
  std::size_t num_classes = 2;
  std::size_t seq_len_min = 20;
  std::size_t seq_len_max = 20;
  std::size_t span_len_min = 4;
  std::size_t span_len_max = 4;
  std::size_t signal_pool_size = 20;
  std::size_t num_examples = 2000;
  bool scatter = false;
  std::uint64_t seed = 0;
  std::string id_prefix = "syn";

  void Validate() const;
  /// First id of class c's signal pool.
  int SignalPoolStart(std::size_t c) const;
  int NoisePoolStart() const;
};

Dataset GenerateSynthetic(const SyntheticSpec& spec);

struct LoadResult {
  Dataset data;
  std::vector<std::string> diagnostics;
  std::size_t warnings() const { return diagnostics.size(); }
};

/// Reads one JSON object per line: {"id", "tokens", "label", "rationale"?}.
/// Malformed lines are skipped with a "line N: ..." diagnostic; a label
/// outside [0, num_classes) is fatal (DataError).
LoadResult ParseJsonl(std::string_view text, std::size_t num_classes);
LoadResult LoadJsonl(const std::filesystem::path& path, std::size_t num_classes);
std::string DatasetToJsonl(const Dataset& data);
void SaveJsonl(const Dataset& data, const std::filesystem::path& path);

/// Keeps gold rationales on exactly floor(f·N) examples picked by a seeded
/// shuffle and drops them elsewhere. The shuffle does not depend on f, so
/// retained sets are nested across fractions at a fixed seed.
Dataset SubsampleGold(const Dataset& data, double fraction, std::uint64_t seed);

std::size_t CountGold(const Dataset& data);

/// Seeded shuffle then split; the first part gets round(N·first_fraction).
std::pair<Dataset, Dataset> SplitDataset(const Dataset& data, double first_fraction,
                                         std::uint64_t seed);

}  // namespace ratex

#endif  // RATEX_DATA_HPP_
