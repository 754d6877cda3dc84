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

#ifndef RATEX_METRICS_HPP_
#define RATEX_METRICS_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ratex {

// ---------------------------------------------------------------------------
// Faithfulness
// ---------------------------------------------------------------------------

/// Mean over examples and bins of prob_full[i] - prob_reduced[i][b].
///
/// prob_full is p(y|x) for the class y predicted on the full input;
/// prob_reduced holds p(y|reduced input) per bin. With rationale-only
/// inputs this is sufficiency (lower is better), with contrast inputs
/// comprehensiveness (higher is better).
double Aopc(std::span<const double> prob_full, std::span<const std::vector<double>> prob_reduced);

// ---------------------------------------------------------------------------
// Plausibility
// ---------------------------------------------------------------------------

struct TokenPrf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double iou = 0.0;
};

/// Token-level precision/recall/F1 and IOU of one prediction. Gold must
/// select at least one token.
TokenPrf TokenScores(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gold);

enum class Averaging { kMicro, kMacro };
std::string_view ToString(Averaging a);
Averaging ParseAveraging(std::string_view s);

struct CorpusPlausibility {
  double tf1 = 0.0;
  /// Fraction of instances whose IOU reaches the match threshold.
  double iou_f1 = 0.0;
  std::size_t instances = 0;
  std::size_t excluded = 0;  // gold selected nothing
};

inline constexpr double kIouMatchThreshold = 0.5;

/// Corpus TF1 (micro: pooled token counts; macro: mean of instance F1)
/// and IOU-F1. Instances with an all-zero gold mask are skipped and
/// counted in `excluded`.
CorpusPlausibility CorpusTokenScores(std::span<const std::vector<std::uint8_t>> preds,
                                     std::span<const std::vector<std::uint8_t>> golds,
                                     Averaging averaging = Averaging::kMicro);

/// Average precision over all tokens pooled: sum over distinct thresholds
/// of (R_t - R_{t-1})·P_t, thresholds swept at every distinct score.
double AveragePrecision(std::span<const double> scores, std::span<const std::uint8_t> gold);
double Auprc(std::span<const std::vector<double>> scores,
             std::span<const std::vector<std::uint8_t>> golds);

// ---------------------------------------------------------------------------
// Task
// ---------------------------------------------------------------------------

struct ClassificationScores {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
};

/// Macro-F1 averages over all M classes; a class absent from both preds
/// and golds scores 0.
ClassificationScores ClassificationMetrics(std::span<const int> preds, std::span<const int> golds,
                                           std::size_t num_classes);

// ---------------------------------------------------------------------------
// Normalized relative gain
// ---------------------------------------------------------------------------

struct NrgInputRow {
  std::string system;
  double comp = 0.0;
  double suff = 0.0;
  double tf1 = 0.0;
  double auprc = 0.0;
  double task = 0.0;
};

struct ColumnBounds {
  double min = 0.0;
  double max = 0.0;
  bool higher_better = true;
};

struct NrgColumnBounds {
  ColumnBounds comp{0, 0, true};
  ColumnBounds suff{0, 0, false};
  ColumnBounds tf1{0, 0, true};
  ColumnBounds auprc{0, 0, true};
  ColumnBounds task{0, 0, true};
};

struct NrgScores {
  double fnrg = 0.0;
  double pnrg = 0.0;
  double tnrg = 0.0;
  double cnrg = 0.0;
};

/// (v - min)/(max - min), or (max - v)/(max - min) for lower-is-better.
/// A constant column maps to 1.
double NormalizeColumn(double v, const ColumnBounds& b);
NrgColumnBounds BoundsFromRows(std::span<const NrgInputRow> rows);
NrgScores NrgForRow(const NrgInputRow& row, const NrgColumnBounds& bounds);

/// Per-system NRG with bounds taken from the rows themselves (at least two
/// systems required) or supplied explicitly.
std::vector<NrgScores> NrgCompose(std::span<const NrgInputRow> rows,
                                  const std::optional<NrgColumnBounds>& bounds = std::nullopt);

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// Everything measured on one example; reports are reductions over these.
struct ExampleEvaluation {
  int gold_label = 0;
  int predicted = 0;
  double prob_full = 0.0;            // p(predicted | x)
  std::vector<double> prob_suff;     // per AOPC bin, rationale-only input
  std::vector<double> prob_comp;     // per AOPC bin, contrast input
  std::vector<double> scores;        // extractor logits
  std::vector<std::uint8_t> pred_rationale;             // at the plausibility k
  std::optional<std::vector<std::uint8_t>> gold_rationale;
};

struct StratumReport {
  std::size_t count = 0;
  double suff_aopc = 0.0;
  double comp_aopc = 0.0;
  std::optional<double> tf1;
  std::optional<double> auprc;
  std::optional<double> iou_f1;
};

struct MetricReport {
  std::size_t count = 0;
  double suff_aopc = 0.0;
  double comp_aopc = 0.0;
  std::optional<double> tf1;
  std::optional<double> auprc;
  std::optional<double> iou_f1;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  /// Split by prediction correctness; absent when the stratum is empty.
  std::optional<StratumReport> correct;
  std::optional<StratumReport> incorrect;
  std::optional<NrgScores> nrg;
};

/// Faithfulness and plausibility over a set of examples. Plausibility
/// fields stay empty when no example carries gold.
StratumReport ComputeStratum(std::span<const ExampleEvaluation> evals,
                             Averaging averaging = Averaging::kMicro);

/// Full report including per-correctness strata. `correct` flags align
/// with evals.
MetricReport StratifiedReport(std::span<const ExampleEvaluation> evals,
                              std::span<const std::uint8_t> correct, std::size_t num_classes,
                              Averaging averaging = Averaging::kMicro);

/// StratifiedReport with flags predicted == gold.
MetricReport BuildReport(std::span<const ExampleEvaluation> evals, std::size_t num_classes,
                         Averaging averaging = Averaging::kMicro);

enum class TaskMetric { kAccuracy, kMacroF1 };
TaskMetric ParseTaskMetric(std::string_view s);
std::string_view ToString(TaskMetric m);

/// NRG of one report against given bounds; empty when plausibility is
/// missing.
std::optional<NrgScores> ReportNrg(const MetricReport& report, const NrgColumnBounds& bounds,
                                   TaskMetric task_metric);

// Serialization. JSON mirrors MetricReport; absent fields are null.
std::string ReportToJson(const MetricReport& report, int indent = 2);
MetricReport ReportFromJson(std::string_view text);

/// Raw-metric CSV: header system,comp,suff,tf1,auprc,task.
std::vector<NrgInputRow> ParseNrgCsv(std::string_view text);
/// Input columns followed by fnrg,pnrg,tnrg,cnrg at 6 decimals.
std::string NrgToCsv(std::span<const NrgInputRow> rows, std::span<const NrgScores> scores);

}  // namespace ratex

#endif  // RATEX_METRICS_HPP_
