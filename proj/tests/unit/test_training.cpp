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
#include <filesystem>
#include <limits>
#include <vector>

#include "doctest.h"
#include "ratex/adam.hpp"
#include "ratex/data.hpp"
#include "ratex/error.hpp"
#include "ratex/training.hpp"

using namespace ratex;

namespace {

Dataset Synthetic(std::size_t n, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.num_examples = n;
  spec.seed = seed;
  spec.id_prefix = "s" + std::to_string(seed);
  return GenerateSynthetic(spec);
}

TrainConfig SmallConfig() {
  TrainConfig cfg;
  cfg.model.embed_dim = 8;
  cfg.model.hidden_dim = 12;
  cfg.optim.lr = 0.01;
  cfg.batch_size = 16;
  cfg.max_epochs = 2;
  cfg.patience = 2;
  return cfg;
}

std::vector<const Example*> Pointers(const Dataset& d) {
  std::vector<const Example*> out;
  for (const Example& ex : d) out.push_back(&ex);
  return out;
}

double MaxAbs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST_CASE("zero auxiliary weights collapse to a plain cross-entropy step") {
  TrainConfig cfg = SmallConfig();
  cfg.weights.alpha_c = cfg.weights.alpha_s = cfg.weights.alpha_p = 0.0;
  const Dataset data = Synthetic(24, 1);
  const auto batch = Pointers(data);

  TrainerState state(cfg);
  ModelParams reference = state.params;
  TrainStep(state, batch, cfg);

  Tape tape;
  const BoundModel bound = Bind(tape, reference);
  std::vector<NodeId> terms;
  for (const Example& ex : data) {
    const NodeId ones = tape.Constant(Tensor::Column(std::vector<double>(ex.tokens.size(), 1.0)));
    const int target[1] = {ex.label};
    terms.push_back(
        tape.SoftmaxCrossEntropy(TaskLogits(tape, reference, bound, ex.tokens, ones), target));
  }
  tape.Backward(tape.MeanOf(terms));
  std::vector<std::vector<double>> grads;
  for (NodeId leaf : bound.leaves) {
    const auto g = tape.grad(leaf);
    grads.emplace_back(g.begin(), g.end());
  }
  AdamState adam;
  const std::vector<Tensor*> tensors = reference.Parameters();
  AdamStep(tensors, grads, adam, cfg.optim);
  CHECK(reference == state.params);
}

TEST_CASE("plausibility reaches the extractor") {
  TrainConfig cfg = SmallConfig();
  cfg.weights.alpha_c = cfg.weights.alpha_s = 0.0;
  cfg.weights.alpha_p = 1.0;
  const Dataset data = Synthetic(8, 2);
  const ModelParams params = BuildModel(cfg.model, 0);
  Rng noise(0);
  const LossEvaluation ev = LossAndGradients(params, Pointers(data), cfg, 1.0, noise);
  double mass = 0.0;
  for (std::size_t i : params.ExtractorOnlyParameters()) mass += MaxAbs(ev.grads[i]);
  CHECK(mass > 0.0);
  CHECK(ev.loss.plaus > 0.0);
  CHECK(ev.masks_differed.empty());
}

TEST_CASE("faithfulness reaches the extractor only through the imle splice") {
  TrainConfig cfg = SmallConfig();
  cfg.weights.alpha_p = 0.0;
  cfg.weights.k_set = {20.0, 50.0};
  const Dataset data = Synthetic(8, 3);
  const auto batch = Pointers(data);
  const ModelParams params = BuildModel(cfg.model, 4);
  const std::vector<std::size_t> extractor_only = params.ExtractorOnlyParameters();
  REQUIRE_FALSE(extractor_only.empty());

  Tape tape;
  const BoundModel bound = Bind(tape, params);
  const LossGraph g = BuildLossGraph(tape, params, bound, batch, cfg.weights);
  tape.Backward(g.total);
  for (std::size_t i : extractor_only) {
    const auto grad = tape.grad(bound.leaves[i]);
    CHECK(MaxAbs({grad.begin(), grad.end()}) == 0.0);
  }
  CHECK(g.selections.size() == data.size());
  CHECK(g.values.suff.size() == 2);

  Rng noise(5);
  const LossEvaluation ev = LossAndGradients(params, batch, cfg, 50.0, noise);
  double mass = 0.0;
  for (std::size_t i : extractor_only) mass += MaxAbs(ev.grads[i]);
  CHECK(mass > 0.0);
  CHECK(ev.masks_differed.size() == data.size() * 2);
  CHECK(ev.loss.total == doctest::Approx(g.values.total));
}

TEST_CASE("early stopping") {
  EarlyStopper s(2);
  CHECK_FALSE(s.Observe(1.0));
  CHECK_FALSE(s.Observe(0.8));
  CHECK_FALSE(s.Observe(0.9));
  CHECK(s.Observe(0.85));
  CHECK(s.best_epoch() == 2);
  CHECK(s.best_value() == 0.8);

  EarlyStopper nan_first(1);
  CHECK(nan_first.Observe(std::numeric_limits<double>::quiet_NaN()));
  CHECK(nan_first.best_epoch() == 0);
  CHECK_THROWS_AS(EarlyStopper(0), ContractViolation);
}

TEST_CASE("training is deterministic and keeps the best epoch") {
  TrainConfig cfg = SmallConfig();
  cfg.max_epochs = 3;
  const Dataset train = Synthetic(96, 5), dev = Synthetic(32, 6);
  const auto dir = std::filesystem::temp_directory_path() / "ratex_test_ckpt";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  cfg.checkpoint_dir = dir.string();
  const TrainingResult a = RunTraining(cfg, train, dev);
  const TrainingResult b = RunTraining(cfg, train, dev);
  CHECK(RunLogToJson(a.log) == RunLogToJson(b.log));
  CHECK(CheckpointToString(a.best) == CheckpointToString(b.best));
  CHECK(LoadCheckpoint(dir / "best.ckpt.json") == a.best);
  std::filesystem::remove_all(dir);

  REQUIRE(a.log.best_epoch >= 1);
  CHECK(a.log.epochs.size() == 3);
  CHECK(a.log.stop_reason == "max-epochs");
  CHECK_FALSE(a.log.aborted);
  const MetricReport again = EvaluateModel(a.best, dev, cfg.eval);
  CHECK(ReportToJson(again) == ReportToJson(a.log.epochs[a.log.best_epoch - 1].dev));
  CHECK(RunLogToJson(a.log).find("wall_time") == std::string::npos);
}

TEST_CASE("evaluation without gold leaves plausibility absent") {
  const ModelParams params = BuildModel(ModelConfig{}, 1);
  Dataset dev = Synthetic(40, 7);
  for (Example& ex : dev) ex.rationale.reset();
  const MetricReport r = EvaluateModel(params, dev, EvalConfig{});
  CHECK_FALSE(r.tf1.has_value());
  CHECK_FALSE(r.auprc.has_value());
  CHECK_FALSE(r.iou_f1.has_value());
  CHECK(std::isfinite(r.suff_aopc));
  CHECK(std::isfinite(r.comp_aopc));
  CHECK(ReportToJson(r).find("\"tf1\": null") != std::string::npos);
}

TEST_CASE("full-length rationale has zero sufficiency") {
  const ModelParams params = BuildModel(ModelConfig{}, 2);
  const Dataset dev = Synthetic(30, 8);
  EvalConfig cfg;
  cfg.aopc_bins = {100.0};
  const MetricReport r = EvaluateModel(params, dev, cfg);
  CHECK(r.suff_aopc == 0.0);
}

TEST_CASE("untrained model is at chance") {
  SyntheticSpec spec;
  spec.num_examples = 2000;
  spec.seed = 11;
  const Dataset dev = GenerateSynthetic(spec);
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const MetricReport r = EvaluateModel(BuildModel(ModelConfig{}, seed), dev, EvalConfig{});
    total += r.accuracy;
  }
  CHECK(total / 5.0 == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("plausibility k resolution") {
  const Dataset d = Synthetic(20, 9);  // spans of 4 in 20 tokens
  EvalConfig cfg;
  CHECK(ResolvePlausK(cfg, d) == doctest::Approx(20.0));
  cfg.plaus_k = 35.0;
  CHECK(ResolvePlausK(cfg, d) == 35.0);
  Dataset bare = d;
  for (Example& ex : bare) ex.rationale.reset();
  CHECK(ResolvePlausK(EvalConfig{}, bare) == 50.0);
}

TEST_CASE("non-finite parameters abort the step") {
  TrainConfig cfg = SmallConfig();
  const Dataset data = Synthetic(8, 10);
  for (bool extractor : {false, true}) {
    TrainerState state(cfg);
    Tensor& t = extractor ? state.params.extractor_head_bias : state.params.task_head_bias;
    t.values[0] = std::numeric_limits<double>::quiet_NaN();
    const std::string before = CheckpointToString(state.params);
    const StepResult r = TrainStep(state, Pointers(data), cfg);
    CHECK(r.aborted);
    CHECK(state.flagged);
    CHECK(state.steps == 0);
    CHECK(CheckpointToString(state.params) == before);
  }
}

TEST_CASE("sweeps produce one row per setting") {
  TrainConfig cfg = SmallConfig();
  cfg.max_epochs = 1;
  const Dataset train = Synthetic(48, 12), dev = Synthetic(16, 13);
  SweepConfig sweep;
  sweep.jobs = 3;
  sweep.axis = SweepAxis::kWeightGrid;
  const auto grid = RunSweep(cfg, train, dev, sweep);
  CHECK(grid.size() == 9);
  sweep.axis = SweepAxis::kAnnotationFraction;
  const auto frac = RunSweep(cfg, train, dev, sweep);
  CHECK(frac.size() == 6);
  sweep.axis = SweepAxis::kTopkTransfer;
  const auto topk = RunSweep(cfg, train, dev, sweep);
  REQUIRE(topk.size() == 5);
  for (const SweepRow& r : topk) CHECK(r.best_epoch == topk[0].best_epoch);

  sweep.jobs = 1;
  const auto serial = RunSweep(cfg, train, dev, sweep);
  CHECK(SweepToCsv(serial) == SweepToCsv(topk));
  const std::string csv = SweepToCsv(grid);
  CHECK(csv.rfind("axis,alpha_f,alpha_p,fraction,k,seed,best_epoch", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 10);
}

TEST_CASE("config validation") {
  TrainConfig cfg;
  cfg.batch_size = 0;
  CHECK_THROWS(cfg.Validate());
  cfg = TrainConfig{};
  cfg.imle.lambda = 0.0;
  CHECK_THROWS(cfg.Validate());
  cfg.weights.alpha_c = cfg.weights.alpha_s = 0.0;
  CHECK_NOTHROW(cfg.Validate());
  EvalConfig e;
  e.aopc_bins.clear();
  CHECK_THROWS(e.Validate());
}
