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

#ifndef RATEX_TRAINING_HPP_
#define RATEX_TRAINING_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ratex/adam.hpp"
#include "ratex/autodiff.hpp"
#include "ratex/data.hpp"
#include "ratex/losses.hpp"
#include "ratex/metrics.hpp"
#include "ratex/model.hpp"
#include "ratex/rng.hpp"
#include "ratex/topk.hpp"

namespace ratex {

struct EvalConfig {
  /// Top-k percentages averaged by the AOPC metrics.
  std::vector<double> aopc_bins{5.0, 10.0, 20.0, 50.0};
  /// Percent of tokens in the predicted rationale scored against gold.
  /// 0 means the mean gold fraction of the evaluated dataset.
  double plaus_k = 0.0;
  Averaging averaging = Averaging::kMicro;
  TaskMetric task_metric = TaskMetric::kAccuracy;
  void Validate() const;
};

struct TrainConfig {
  ModelConfig model;
  LossWeights weights;
  /// imle.lambda is the starting step size when AIMLE is enabled.
  ImleConfig imle;
  bool aimle_enabled = true;
  AimleConfig aimle;
  AdamConfig optim;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 10;
  std::size_t patience = 5;
  std::uint64_t seed = 0;
  EvalConfig eval;
  /// Where the best checkpoint is written during training; empty keeps it
  /// in memory only.
  std::string checkpoint_dir;
  void Validate() const;
};

using Batch = std::span<const Example* const>;

/// Masks per example, one per entry of the k-set.
using MaskSet = std::vector<std::vector<RationaleMask>>;

/// Nodes of one batch objective on a tape.
struct LossGraph {
  NodeId total;
  LossBreakdown values;
  std::size_t gold_count = 0;  // examples contributing to plausibility
  struct Selection {
    NodeId scores;                  // n x 1 extractor output
    std::vector<NodeId> masks;      // r^(k) leaves, n x 1
    std::vector<std::size_t> counts;
  };
  /// One entry per example when a faithfulness term is active.
  std::vector<Selection> selections;
  MaskSet masks;
};

/// Builds task CE, the margin criteria for every k and plausibility BCE
/// over a batch. Terms with zero weight are not built at all. Masks come
/// from the current scores unless `fixed` supplies them.
LossGraph BuildLossGraph(Tape& tape, const ModelParams& params, const BoundModel& bound,
                         Batch batch, const LossWeights& weights,
                         const MaskSet* fixed = nullptr);

struct LossEvaluation {
  LossBreakdown loss;
  /// Aligned with ModelParams::Parameters().
  std::vector<std::vector<double>> grads;
  /// Per (example, k) selection: did any IMLE sample's target mask differ.
  std::vector<std::uint8_t> masks_differed;
};

/// Forward and backward for one batch. The extractor-score gradient is the
/// IMLE estimate scaled by 1/lambda, spliced in for every k.
LossEvaluation LossAndGradients(const ModelParams& params, Batch batch, const TrainConfig& cfg,
                                double lambda, Rng& noise);

struct TrainerState {
  explicit TrainerState(const TrainConfig& cfg);
  ModelParams params;
  AdamState adam;
  AimleController aimle;
  Rng noise;
  double lambda = 1.0;
  std::int64_t steps = 0;
  bool flagged = false;  // a step hit a non-finite loss
};

struct StepResult {
  LossBreakdown loss;
  double lambda_used = 0.0;
  double lambda_next = 0.0;
  double observed_rate = 0.0;
  std::size_t masks_differed = 0;
  std::size_t selections = 0;
  bool aborted = false;
};

/// One optimizer step. A non-finite loss or gradient leaves the state
/// untouched apart from setting `flagged`.
StepResult TrainStep(TrainerState& state, Batch batch, const TrainConfig& cfg);

/// Deterministic objective over a dataset (no noise, no update), in chunks
/// of batch_size. Used for checkpoint selection.
LossBreakdown EvaluateLoss(const ModelParams& params, const Dataset& data, const TrainConfig& cfg);

/// 100 × mean gold fraction over examples carrying gold, or 50 without gold.
double ResolvePlausK(const EvalConfig& cfg, const Dataset& data);

ExampleEvaluation EvaluateExample(const ModelParams& params, const Example& ex,
                                  std::span<const double> aopc_bins, double plaus_k);

MetricReport EvaluateModel(const ModelParams& params, const Dataset& data, const EvalConfig& cfg,
                           const std::optional<NrgColumnBounds>& nrg_bounds = std::nullopt);

/// Stops once `patience` epochs pass without a strict improvement.
class EarlyStopper {
 public:
  explicit EarlyStopper(std::size_t patience);
  /// Records the next epoch's criterion; true means stop now.
  bool Observe(double value);
  std::size_t best_epoch() const { return best_epoch_; }  // 1-based, 0 before any epoch
  double best_value() const { return best_; }
  bool improved_last() const { return improved_last_; }

 private:
  std::size_t patience_;
  std::size_t epoch_ = 0;
  std::size_t best_epoch_ = 0;
  double best_ = 0.0;
  bool improved_last_ = false;
};

struct EpochLog {
  std::size_t epoch = 0;
  LossBreakdown train;  // batch-size weighted mean over steps
  LossBreakdown dev_loss;
  MetricReport dev;
  double lambda = 0.0;
  double observed_rate = 0.0;
};

struct RunLog {
  std::vector<EpochLog> epochs;
  std::size_t best_epoch = 0;
  std::uint64_t seed = 0;
  std::string stop_reason;
  bool aborted = false;
  std::string config_snapshot;  // JSON of the TrainConfig
  double wall_time_s = 0.0;     // not serialized with the log
};

struct TrainingResult {
  ModelParams best;
  RunLog log;
};

TrainingResult RunTraining(const TrainConfig& cfg, const Dataset& train, const Dataset& dev);

std::string TrainConfigToJson(const TrainConfig& cfg);
/// Everything except wall time, so identical runs give identical bytes.
std::string RunLogToJson(const RunLog& log);

enum class SweepAxis { kWeightGrid, kAnnotationFraction, kTopkTransfer };
std::string_view ToString(SweepAxis a);
SweepAxis ParseSweepAxis(std::string_view s);
/// {0, 0.5, 1}; {0.001, 0.01, 0.1, 0.2, 0.5, 1}; {20, 30, 40, 50, 60}.
std::vector<double> DefaultSweepValues(SweepAxis a);

struct SweepConfig {
  SweepAxis axis = SweepAxis::kWeightGrid;
  std::vector<double> values;  // empty: DefaultSweepValues(axis)
  double train_k = 50.0;       // topk-transfer only
  std::size_t jobs = 1;
};

struct SweepRow {
  std::string axis;
  double alpha_f = 0.0;
  double alpha_p = 0.0;
  double fraction = 1.0;
  double k = 0.0;  // evaluation top-k percent used for TF1
  std::uint64_t seed = 0;
  std::size_t best_epoch = 0;
  MetricReport report;
};

/// Independent runs, at most `jobs` at a time; rows come back in axis order.
std::vector<SweepRow> RunSweep(const TrainConfig& base, const Dataset& train, const Dataset& dev,
                               const SweepConfig& sweep);

std::string SweepToCsv(std::span<const SweepRow> rows);
std::string SweepToJson(std::span<const SweepRow> rows);

}  // namespace ratex

#endif  // RATEX_TRAINING_HPP_
