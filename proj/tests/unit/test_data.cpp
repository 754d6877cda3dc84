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

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "ratex/data.hpp"
#include "ratex/error.hpp"

using namespace ratex;

namespace {

// Token-frequency classifier fit on one dataset and scored on another, using
// only positions whose gold flag equals `keep`.
double FrequencyAccuracy(const Dataset& fit, const Dataset& score, std::uint8_t keep,
                         std::size_t num_classes) {
  std::map<int, std::vector<double>> counts;
  for (const Example& ex : fit)
    for (std::size_t t = 0; t < ex.tokens.size(); ++t)
      if ((*ex.rationale)[t] == keep) {
        auto& c = counts[ex.tokens[t]];
        c.resize(num_classes, 0.0);
        c[static_cast<std::size_t>(ex.label)] += 1.0;
      }
  std::size_t right = 0;
  for (const Example& ex : score) {
    std::vector<double> vote(num_classes, 0.0);
    for (std::size_t t = 0; t < ex.tokens.size(); ++t) {
      if ((*ex.rationale)[t] != keep) continue;
      const auto it = counts.find(ex.tokens[t]);
      if (it == counts.end()) continue;
      double total = 0.0;
      for (double v : it->second) total += v;
      for (std::size_t c = 0; c < num_classes; ++c) vote[c] += it->second[c] / total;
    }
    const auto best = std::max_element(vote.begin(), vote.end()) - vote.begin();
    if (best == ex.label) ++right;
  }
  return static_cast<double>(right) / static_cast<double>(score.size());
}

std::size_t GoldCountMatching(const Dataset& d, const std::set<std::string>& ids) {
  std::size_t n = 0;
  for (const Example& ex : d)
    if (ex.rationale && ids.count(ex.id)) ++n;
  return n;
}

std::set<std::string> GoldIds(const Dataset& d) {
  std::set<std::string> ids;
  for (const Example& ex : d)
    if (ex.rationale) ids.insert(ex.id);
  return ids;
}

}  // namespace

TEST_CASE("synthetic generation is deterministic") {
  SyntheticSpec spec;
  spec.num_examples = 300;
  spec.seed = 17;
  CHECK(GenerateSynthetic(spec) == GenerateSynthetic(spec));
  spec.seed = 18;
  const Dataset other = GenerateSynthetic(spec);
  spec.seed = 17;
  CHECK_FALSE(GenerateSynthetic(spec) == other);
}

TEST_CASE("planted spans come from the label's pool") {
  SyntheticSpec spec;
  spec.num_classes = 3;
  spec.seq_len_min = 8;
  spec.seq_len_max = 30;
  spec.span_len_min = 2;
  spec.span_len_max = 6;
  spec.num_examples = 500;
  for (bool scatter : {false, true}) {
    spec.scatter = scatter;
    for (const Example& ex : GenerateSynthetic(spec)) {
      REQUIRE(ex.rationale.has_value());
      const int lo = spec.SignalPoolStart(static_cast<std::size_t>(ex.label));
      const int hi = lo + static_cast<int>(spec.signal_pool_size);
      std::size_t ones = 0, first = ex.tokens.size(), last = 0;
      for (std::size_t t = 0; t < ex.tokens.size(); ++t) {
        if ((*ex.rationale)[t]) {
          ++ones;
          first = std::min(first, t);
          last = t;
          CHECK((ex.tokens[t] >= lo && ex.tokens[t] < hi));
        } else {
          CHECK(ex.tokens[t] >= spec.NoisePoolStart());
          CHECK(ex.tokens[t] < static_cast<int>(spec.vocab_size));
        }
      }
      CHECK(ones >= spec.span_len_min);
      CHECK(ones <= spec.span_len_max);
      if (!scatter) CHECK(last - first + 1 == ones);
    }
  }
}

TEST_CASE("label is recoverable from the span only") {
  SyntheticSpec spec;
  spec.num_examples = 2000;
  const Dataset fit = GenerateSynthetic(spec);
  spec.seed = 99;
  spec.id_prefix = "held";
  const Dataset held = GenerateSynthetic(spec);
  CHECK(FrequencyAccuracy(fit, held, 1, 2) == 1.0);
  const double chance = FrequencyAccuracy(fit, held, 0, 2);
  CHECK(chance == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("invalid synthetic specs") {
  SyntheticSpec spec;
  spec.vocab_size = 40;  // two pools of 20 leave no noise tokens
  CHECK_THROWS_AS(spec.Validate(), ConfigError);
  spec = SyntheticSpec{};
  spec.span_len_min = spec.span_len_max = 25;
  CHECK_THROWS_AS(spec.Validate(), ConfigError);
}

TEST_CASE("jsonl loading") {
  std::string text;
  for (int i = 0; i < 100; ++i) {
    if (i == 41)
      text += "{\"id\": \"bad\", \"tokens\": [5, 6, 7], \"label\": 0, \"rationale\": [1, 0]}\n";
    else
      text += "{\"id\": \"e" + std::to_string(i) + "\", \"tokens\": [5, 6, 7], \"label\": " +
              std::to_string(i % 2) + "}\n";
  }
  const LoadResult r = ParseJsonl(text, 2);
  CHECK(r.data.size() == 99);
  CHECK(r.warnings() == 1);
  CHECK(r.diagnostics[0].find("42") != std::string::npos);
  CHECK_FALSE(r.data[0].rationale.has_value());

  CHECK_THROWS_AS(ParseJsonl("{\"id\": \"x\", \"tokens\": [1], \"label\": 4}\n", 2), DataError);
}

TEST_CASE("jsonl round trip") {
  SyntheticSpec spec;
  spec.num_examples = 40;
  Dataset d = GenerateSynthetic(spec);
  d[3].rationale.reset();
  CHECK(ParseJsonl(DatasetToJsonl(d), 2).data == d);

  const auto path = std::filesystem::temp_directory_path() / "ratex_test_roundtrip.jsonl";
  SaveJsonl(d, path);
  const LoadResult back = LoadJsonl(path, 2);
  std::filesystem::remove(path);
  CHECK(back.data == d);
  CHECK(back.warnings() == 0);
  CHECK_THROWS_AS(LoadJsonl(path, 2), DataError);
}

TEST_CASE("gold subsampling") {
  SyntheticSpec spec;
  spec.num_examples = 50;
  const Dataset d = GenerateSynthetic(spec);
  CHECK(SubsampleGold(d, 1.0, 3) == d);
  CHECK(CountGold(SubsampleGold(d, 0.0, 3)) == 0);
  const Dataset fifth = SubsampleGold(d, 0.2, 3);
  CHECK(CountGold(fifth) == 10);
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(fifth[i].label == d[i].label);
    CHECK(fifth[i].tokens == d[i].tokens);
  }
  CHECK(SubsampleGold(d, 0.2, 3) == fifth);
  const Dataset tenth = SubsampleGold(d, 0.1, 3);
  CHECK(CountGold(tenth) == 5);
  CHECK(GoldCountMatching(fifth, GoldIds(tenth)) == 5);
  CHECK_THROWS(SubsampleGold(d, 1.5, 3));
}

TEST_CASE("deterministic split") {
  SyntheticSpec spec;
  spec.num_examples = 101;
  const Dataset d = GenerateSynthetic(spec);
  const auto [a, b] = SplitDataset(d, 0.8, 4);
  CHECK(a.size() + b.size() == d.size());
  CHECK(a.size() == 81);
  const auto again = SplitDataset(d, 0.8, 4);
  CHECK(again.first == a);
  CHECK(again.second == b);
  std::set<std::string> ids;
  for (const Example& ex : a) ids.insert(ex.id);
  for (const Example& ex : b) CHECK(ids.count(ex.id) == 0);
}
