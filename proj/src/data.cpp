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

#include "ratex/data.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "ratex/error.hpp"
#include "ratex/io.hpp"
#include "ratex/model.hpp"
#include "ratex/rng.hpp"

namespace ratex {
namespace {

using nlohmann::ordered_json;

std::string LineError(std::size_t line, const std::string& what) {
  return "line " + std::to_string(line) + ": " + what;
}

}  // namespace

void ValidateExample(const Example& ex, std::size_t num_classes) {
  if (ex.tokens.empty()) throw DataError("example '" + ex.id + "': no tokens");
  for (int t : ex.tokens)
    if (t < kFirstTokenId)
      throw DataError("example '" + ex.id + "': token id " + std::to_string(t) + " is reserved");
  if (ex.label < 0 || static_cast<std::size_t>(ex.label) >= num_classes)
    throw DataError("example '" + ex.id + "': unknown label " + std::to_string(ex.label));
  if (ex.rationale) {
    if (ex.rationale->size() != ex.tokens.size())
      throw DataError("example '" + ex.id + "': rationale length " +
                      std::to_string(ex.rationale->size()) + " != token count " +
                      std::to_string(ex.tokens.size()));
    bool any = false;
    for (std::uint8_t b : *ex.rationale) {
      if (b > 1) throw DataError("example '" + ex.id + "': rationale entries must be 0 or 1");
      any = any || b == 1;
    }
    if (!any) throw DataError("example '" + ex.id + "': rationale selects no token");
  }
}

void SyntheticSpec::Validate() const {
  if (num_classes < 2) throw ConfigError("synthetic: num_classes must be >= 2");
  if (signal_pool_size < 1) throw ConfigError("synthetic: signal pools too small");
  if (static_cast<std::size_t>(NoisePoolStart()) >= vocab_size)
    throw ConfigError("synthetic: vocab_size leaves no room for the noise pool");
  if (seq_len_min < 1 || seq_len_min > seq_len_max)
    throw ConfigError("synthetic: invalid sequence length range");
  if (span_len_min < 1 || span_len_min > span_len_max)
    throw ConfigError("synthetic: invalid rationale length range");
  if (span_len_max > seq_len_min)
    throw ConfigError("synthetic: rationale length may exceed sequence length");
}

int SyntheticSpec::SignalPoolStart(std::size_t c) const {
  return kFirstTokenId + static_cast<int>(c * signal_pool_size);
}

int SyntheticSpec::NoisePoolStart() const { return SignalPoolStart(num_classes); }

Dataset GenerateSynthetic(const SyntheticSpec& spec) {
  spec.Validate();
  Rng rng = Rng::Stream(spec.seed, "synthetic-data");
  const auto noise_lo = static_cast<std::int64_t>(spec.NoisePoolStart());
  const auto noise_hi = static_cast<std::int64_t>(spec.vocab_size) - 1;
  Dataset out;
  out.reserve(spec.num_examples);
  for (std::size_t i = 0; i < spec.num_examples; ++i) {
    Example ex;
    ex.id = spec.id_prefix + "-" + std::to_string(i);
    ex.label = static_cast<int>(rng.Below(spec.num_classes));
    const auto n = static_cast<std::size_t>(rng.Between(
        static_cast<std::int64_t>(spec.seq_len_min), static_cast<std::int64_t>(spec.seq_len_max)));
    const auto span = static_cast<std::size_t>(rng.Between(
        static_cast<std::int64_t>(spec.span_len_min), static_cast<std::int64_t>(spec.span_len_max)));
    std::vector<std::uint8_t> gold(n, 0);
    if (spec.scatter) {
      std::vector<std::size_t> pos(n);
      std::iota(pos.begin(), pos.end(), std::size_t{0});
      rng.Shuffle(pos.begin(), pos.end());
      for (std::size_t j = 0; j < span; ++j) gold[pos[j]] = 1;
    } else {
      const auto start = static_cast<std::size_t>(rng.Below(n - span + 1));
      std::fill(gold.begin() + static_cast<std::ptrdiff_t>(start),
                gold.begin() + static_cast<std::ptrdiff_t>(start + span), 1);
    }
    const int signal_lo = spec.SignalPoolStart(static_cast<std::size_t>(ex.label));
    ex.tokens.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
      if (gold[t])
        ex.tokens[t] = signal_lo + static_cast<int>(rng.Below(spec.signal_pool_size));
      else
        ex.tokens[t] = static_cast<int>(rng.Between(noise_lo, noise_hi));
    }
    ex.rationale = std::move(gold);
    out.push_back(std::move(ex));
  }
  return out;
}

LoadResult ParseJsonl(std::string_view text, std::size_t num_classes) {
  LoadResult result;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    Example ex;
    try {
      const ordered_json j = ordered_json::parse(line);
      if (!j.is_object()) throw DataError("not a JSON object");
      ex.id = j.at("id").get<std::string>();
      ex.tokens = j.at("tokens").get<std::vector<int>>();
      ex.label = j.at("label").get<int>();
      if (j.contains("rationale") && !j.at("rationale").is_null()) {
        std::vector<std::uint8_t> r;
        for (const auto& v : j.at("rationale")) {
          const int b = v.get<int>();
          if (b != 0 && b != 1) throw DataError("rationale entries must be 0 or 1");
          r.push_back(static_cast<std::uint8_t>(b));
        }
        ex.rationale = std::move(r);
      }
    } catch (const std::exception& e) {
      result.diagnostics.push_back(LineError(lineno, e.what()));
      continue;
    }
    if (ex.label < 0 || static_cast<std::size_t>(ex.label) >= num_classes)
      throw DataError(LineError(lineno, "unknown label " + std::to_string(ex.label)));
    try {
      ValidateExample(ex, num_classes);
    } catch (const DataError& e) {
      result.diagnostics.push_back(LineError(lineno, e.what()));
      continue;
    }
    result.data.push_back(std::move(ex));
  }
  return result;
}

LoadResult LoadJsonl(const std::filesystem::path& path, std::size_t num_classes) {
  return ParseJsonl(ReadTextFile(path), num_classes);
}

std::string DatasetToJsonl(const Dataset& data) {
  std::string out;
  for (const Example& ex : data) {
    ordered_json j;
    j["id"] = ex.id;
    j["tokens"] = ex.tokens;
    j["label"] = ex.label;
    if (ex.rationale) {
      std::vector<int> r(ex.rationale->begin(), ex.rationale->end());
      j["rationale"] = r;
    }
    out += j.dump();
    out += '\n';
  }
  return out;
}

void SaveJsonl(const Dataset& data, const std::filesystem::path& path) {
  WriteTextFile(path, DatasetToJsonl(data));
}

Dataset SubsampleGold(const Dataset& data, double fraction, std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0))
    throw ContractViolation("subsample_gold: fraction must lie in [0, 1]");
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = Rng::Stream(seed, "gold-subsample");
  rng.Shuffle(order.begin(), order.end());
  const auto keep = static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(data.size()) + 1e-9));
  std::vector<std::uint8_t> retain(data.size(), 0);
  for (std::size_t i = 0; i < keep; ++i) retain[order[i]] = 1;
  Dataset out = data;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (!retain[i]) out[i].rationale.reset();
  return out;
}

std::size_t CountGold(const Dataset& data) {
  return static_cast<std::size_t>(std::count_if(
      data.begin(), data.end(), [](const Example& e) { return e.rationale.has_value(); }));
}

std::pair<Dataset, Dataset> SplitDataset(const Dataset& data, double first_fraction,
                                         std::uint64_t seed) {
  if (!(first_fraction >= 0.0 && first_fraction <= 1.0))
    throw ContractViolation("split: fraction must lie in [0, 1]");
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = Rng::Stream(seed, "split");
  rng.Shuffle(order.begin(), order.end());
  const auto first = static_cast<std::size_t>(
      std::llround(first_fraction * static_cast<double>(data.size())));
  std::pair<Dataset, Dataset> out;
  for (std::size_t i = 0; i < order.size(); ++i)
    (i < first ? out.first : out.second).push_back(data[order[i]]);
  return out;
}

}  // namespace ratex
