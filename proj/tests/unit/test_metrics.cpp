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
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "ratex/error.hpp"
#include "ratex/metrics.hpp"
#include "ratex/rng.hpp"

using namespace ratex;

using Bits = std::vector<std::uint8_t>;

namespace {

std::string ReadFile(const std::string& name) {
  std::ifstream in(std::string(RATEX_TEST_DATA_DIR) + "/" + name);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Expected score columns straight from the CSV, independent of ParseNrgCsv.
std::vector<std::vector<double>> ExpectedColumns(const std::string& text) {
  std::vector<std::vector<double>> out;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    REQUIRE(cells.size() == 10);
    out.push_back({std::stod(cells[6]), std::stod(cells[7]), std::stod(cells[8]),
                   std::stod(cells[9])});
  }
  return out;
}

}  // namespace

TEST_CASE("aopc") {
  const std::vector<double> full{0.9};
  CHECK(Aopc(full, std::vector<std::vector<double>>{{0.4}}) == doctest::Approx(0.5));
  CHECK(Aopc(full, std::vector<std::vector<double>>{{0.8, 0.6}}) == doctest::Approx(0.2));
  CHECK(Aopc(full, std::vector<std::vector<double>>{{0.9, 0.9}}) == 0.0);
  CHECK_THROWS_AS(Aopc(std::vector<double>{}, std::vector<std::vector<double>>{}),
                  ContractViolation);
  CHECK_THROWS_AS(Aopc(full, std::vector<std::vector<double>>{{}}), ContractViolation);
}

TEST_CASE("token scores") {
  const TokenPrf same = TokenScores(Bits{1, 0, 1}, Bits{1, 0, 1});
  CHECK(same.precision == 1.0);
  CHECK(same.recall == 1.0);
  CHECK(same.f1 == 1.0);
  CHECK(same.iou == 1.0);
  const TokenPrf disjoint = TokenScores(Bits{0, 1, 0}, Bits{1, 0, 1});
  CHECK(disjoint.f1 == 0.0);
  CHECK(disjoint.iou == 0.0);
  const TokenPrf half = TokenScores(Bits{1, 1, 0, 0}, Bits{1, 0, 1, 0});
  CHECK(half.precision == doctest::Approx(0.5));
  CHECK(half.recall == doctest::Approx(0.5));
  CHECK(half.f1 == doctest::Approx(0.5));
  CHECK(half.iou == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(TokenScores(Bits{1, 0}, Bits{0, 0}), ContractViolation);
}

TEST_CASE("corpus token scores") {
  const std::vector<Bits> preds{{1, 1, 0, 0}, {1, 0}, {0, 1}};
  const std::vector<Bits> golds{{1, 0, 1, 0}, {1, 0}, {0, 0}};
  const CorpusPlausibility micro = CorpusTokenScores(preds, golds, Averaging::kMicro);
  // tp 2, fp 1, fn 1 over the two scored instances
  CHECK(micro.tf1 == doctest::Approx(2.0 / 3.0));
  CHECK(micro.iou_f1 == doctest::Approx(0.5));
  CHECK(micro.instances == 2);
  CHECK(micro.excluded == 1);
  const CorpusPlausibility macro = CorpusTokenScores(preds, golds, Averaging::kMacro);
  CHECK(macro.tf1 == doctest::Approx(0.75));
  CHECK(ParseAveraging("macro") == Averaging::kMacro);
  CHECK(ToString(Averaging::kMicro) == "micro");
}

TEST_CASE("average precision") {
  CHECK(AveragePrecision(std::vector<double>{0.9, 0.8, 0.1}, Bits{1, 0, 1}) ==
        doctest::Approx(0.8333).epsilon(1e-3));
  CHECK(AveragePrecision(std::vector<double>{3, 2, 1, 0}, Bits{1, 1, 0, 0}) == 1.0);
  CHECK(AveragePrecision(std::vector<double>{0.5, 0.5, 0.5, 0.5, 0.5}, Bits{1, 0, 1, 0, 0}) ==
        doctest::Approx(0.4));
}

TEST_CASE("auprc is invariant under monotone transforms") {
  Rng rng(5);
  std::vector<std::vector<double>> scores(20), warped(20);
  std::vector<Bits> golds(20);
  for (std::size_t i = 0; i < 20; ++i) {
    for (int t = 0; t < 12; ++t) {
      const double s = std::round(rng.Uniform(-3, 3) * 4.0) / 4.0;  // coarse grid makes ties
      scores[i].push_back(s);
      warped[i].push_back(std::exp(2.0 * s) + 1.0);
      golds[i].push_back(rng.Uniform01Open() < 0.3 ? 1 : 0);
    }
  }
  CHECK(Auprc(scores, golds) == doctest::Approx(Auprc(warped, golds)).epsilon(1e-12));
}

TEST_CASE("classification metrics") {
  const std::vector<int> golds{0, 1, 0, 1}, preds{0, 0, 0, 0};
  const ClassificationScores s = ClassificationMetrics(preds, golds, 2);
  CHECK(s.accuracy == doctest::Approx(0.5));
  CHECK(s.macro_f1 == doctest::Approx(1.0 / 3.0));
  const ClassificationScores perfect = ClassificationMetrics(golds, golds, 2);
  CHECK(perfect.accuracy == 1.0);
  CHECK(perfect.macro_f1 == 1.0);
  const std::vector<int> g2{1, 0, 1, 0}, p2{0, 0, 0, 0};
  CHECK(ClassificationMetrics(p2, g2, 2).macro_f1 == s.macro_f1);
  // absent third class contributes zero
  CHECK(ClassificationMetrics(golds, golds, 3).macro_f1 == doctest::Approx(2.0 / 3.0));
  CHECK_THROWS(ClassificationMetrics(std::vector<int>{5}, std::vector<int>{0}, 2));
}

TEST_CASE("nrg composition examples") {
  ColumnBounds comp{0.0530, 0.3530, true};
  ColumnBounds suff{0.0, 0.4140, false};
  CHECK(NormalizeColumn(0.3054, comp) == doctest::Approx(0.8413).epsilon(1e-3));
  CHECK(NormalizeColumn(0.0, suff) == 1.0);
  CHECK(NormalizeColumn(0.4140, suff) == 0.0);
  CHECK(NormalizeColumn(0.7, ColumnBounds{0.7, 0.7, true}) == 1.0);

  const std::vector<NrgInputRow> rows{{"a", 0.1, 0.2, 0.5, 0.5, 80},
                                      {"b", 0.3, 0.1, 0.7, 0.5, 90}};
  const auto scores = NrgCompose(rows);
  CHECK(scores[1].fnrg == 1.0);
  CHECK(scores[0].fnrg == 0.0);
  CHECK(scores[0].pnrg == 0.5);  // auprc column is constant
  CHECK(scores[1].cnrg == 1.0);
  CHECK_THROWS_AS(NrgCompose(std::span(rows).first(1)), ContractViolation);
  // explicit bounds lift the two-row requirement
  CHECK_NOTHROW(NrgCompose(std::span(rows).first(1), BoundsFromRows(rows)));
}

TEST_CASE("nrg reproduces the published benchmark tables") {
  for (const char* name : {"esnli_benchmark.csv", "cose_benchmark.csv"}) {
    CAPTURE(name);
    const std::string text = ReadFile(name);
    const std::vector<NrgInputRow> rows = ParseNrgCsv(text);
    const auto expected = ExpectedColumns(text);
    REQUIRE(rows.size() == 13);
    REQUIRE(expected.size() == 13);
    const auto got = NrgCompose(rows);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CAPTURE(rows[i].system);
      CHECK(std::abs(got[i].fnrg - expected[i][0]) <= 5e-4);
      CHECK(std::abs(got[i].pnrg - expected[i][1]) <= 5e-4);
      CHECK(std::abs(got[i].tnrg - expected[i][2]) <= 5e-4);
      CHECK(std::abs(got[i].cnrg - expected[i][3]) <= 5e-4);
    }
  }
}

TEST_CASE("nrg csv parsing") {
  const auto rows = ParseNrgCsv("# note\nsystem,task,comp,suff,tf1,auprc,extra\nx,1,2,3,4,5,z\n");
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].system == "x");
  CHECK(rows[0].task == 1.0);
  CHECK(rows[0].auprc == 5.0);
  CHECK_THROWS_AS(ParseNrgCsv("system,comp,suff,tf1,auprc\nx,1,2,3,4\n"), DataError);
  CHECK_THROWS_AS(ParseNrgCsv("system,comp,suff,tf1,auprc,task\nx,1,2,abc,4,5\n"), DataError);
  const std::vector<NrgScores> s{{0.5, 0.25, 1.0, 0.583333}};
  const std::string csv = NrgToCsv(rows, s);
  CHECK(csv.find("fnrg") != std::string::npos);
  CHECK(csv.find("0.583333") != std::string::npos);
}

namespace {

ExampleEvaluation MakeEval(int gold, int pred, double full, double suff, double comp, Bits p,
                           std::optional<Bits> g, std::vector<double> scores) {
  ExampleEvaluation e;
  e.gold_label = gold;
  e.predicted = pred;
  e.prob_full = full;
  e.prob_suff = {suff};
  e.prob_comp = {comp};
  e.pred_rationale = std::move(p);
  e.gold_rationale = std::move(g);
  e.scores = std::move(scores);
  return e;
}

}  // namespace

TEST_CASE("stratified report matches filter-then-compute") {
  std::vector<ExampleEvaluation> evals{
      MakeEval(0, 0, 0.9, 0.85, 0.3, {1, 0}, Bits{1, 0}, {2, 1}),
      MakeEval(1, 0, 0.6, 0.6, 0.5, {0, 1}, Bits{1, 0}, {0, 1}),
      MakeEval(1, 1, 0.8, 0.7, 0.2, {1, 0}, std::nullopt, {1, 0}),
      MakeEval(0, 1, 0.7, 0.5, 0.6, {1, 1}, Bits{0, 1}, {3, 3}),
  };
  const MetricReport r = BuildReport(evals, 2);
  CHECK(r.count == 4);
  CHECK(r.accuracy == 0.5);
  REQUIRE(r.correct.has_value());
  REQUIRE(r.incorrect.has_value());
  const std::vector<ExampleEvaluation> right{evals[0], evals[2]}, wrong{evals[1], evals[3]};
  const StratumReport rr = ComputeStratum(right), ww = ComputeStratum(wrong);
  CHECK(r.correct->suff_aopc == rr.suff_aopc);
  CHECK(r.correct->tf1 == rr.tf1);
  CHECK(r.incorrect->comp_aopc == ww.comp_aopc);
  CHECK(r.incorrect->auprc == ww.auprc);
  CHECK(rr.count == 2);
  CHECK(*rr.tf1 == 1.0);

  std::vector<ExampleEvaluation> all_right{evals[0], evals[2]};
  const MetricReport ar = BuildReport(all_right, 2);
  CHECK_FALSE(ar.incorrect.has_value());
  CHECK(ar.correct->suff_aopc == ar.suff_aopc);
}

TEST_CASE("report json round trip") {
  MetricReport r;
  r.count = 3;
  r.suff_aopc = -0.0125;
  r.comp_aopc = 0.25;
  r.tf1 = 0.75;
  r.accuracy = 2.0 / 3.0;
  r.macro_f1 = 0.5;
  r.correct = StratumReport{2, 0.1, 0.2, 1.0, std::nullopt, 0.5};
  r.nrg = NrgScores{0.1, 0.2, 0.3, 0.2};
  const std::string text = ReportToJson(r);
  CHECK(text.find("\"auprc\": null") != std::string::npos);
  const MetricReport back = ReportFromJson(text);
  CHECK(back.count == 3);
  CHECK(back.suff_aopc == r.suff_aopc);
  CHECK(back.accuracy == r.accuracy);
  CHECK(back.tf1 == r.tf1);
  CHECK_FALSE(back.auprc.has_value());
  CHECK_FALSE(back.incorrect.has_value());
  REQUIRE(back.correct.has_value());
  CHECK(back.correct->iou_f1 == 0.5);
  REQUIRE(back.nrg.has_value());
  CHECK(back.nrg->cnrg == 0.2);
  CHECK(ReportToJson(back) == text);
}

TEST_CASE("report nrg needs plausibility") {
  MetricReport r;
  r.accuracy = 0.9;
  CHECK_FALSE(ReportNrg(r, NrgColumnBounds{}, TaskMetric::kAccuracy).has_value());
  CHECK(ParseTaskMetric("macro-f1") == TaskMetric::kMacroF1);
  CHECK_THROWS_AS(ParseTaskMetric("f2"), ConfigError);
}
