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

#include "ratex/training.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <numeric>
#include <thread>
#include <utility>

#include "json.hpp"
#include "ratex/error.hpp"

namespace ratex {
namespace {

using nlohmann::ordered_json;

NodeId Ones(Tape& tape, std::size_t n) {
  return tape.Constant(Tensor::Column(std::vector<double>(n, 1.0)));
}

void CheckBins(const std::vector<double>& ks, const char* what) {
  if (ks.empty()) throw ConfigError(std::string(what) + " must not be empty");
  for (double k : ks)
    if (!(k > 0.0 && k <= 100.0))
      throw ConfigError(std::string(what) + " entries must lie in (0, 100]");
}

ordered_json BreakdownJson(const LossBreakdown& b) {
  return ordered_json{{"task", b.task}, {"suff", b.suff}, {"comp", b.comp},
                      {"plaus", b.plaus}, {"total", b.total}};
}

ordered_json ReportJson(const MetricReport& r) { return ordered_json::parse(ReportToJson(r, -1)); }

// Runs f(0..count-1) on up to `jobs` threads. Errors are rethrown in index
// order once every worker has finished.
template <typename F>
void ParallelFor(std::size_t count, std::size_t jobs, F&& f) {
  if (count == 0) return;
  jobs = std::clamp<std::size_t>(jobs, 1, count);
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < jobs; ++t) threads.emplace_back(worker);
  worker();
  for (std::thread& t : threads) t.join();
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);
}

std::string Cell(const std::optional<double>& v) {
  if (!v) return "";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", *v);
  return buf;
}

std::string Cell(double v) { return Cell(std::optional<double>(v)); }

}  // namespace

void EvalConfig::Validate() const {
  CheckBins(aopc_bins, "eval.aopc_bins");
  if (!(plaus_k == 0.0 || (plaus_k > 0.0 && plaus_k <= 100.0)))
    throw ConfigError("eval.plaus_k must be 0 (auto) or lie in (0, 100]");
}

void TrainConfig::Validate() const {
  model.Validate();
  weights.Validate();
  imle.Validate();
  eval.Validate();
  if (batch_size < 1) throw ConfigError("train.batch_size must be at least 1");
  if (max_epochs < 1) throw ConfigError("train.max_epochs must be at least 1");
  if (patience < 1) throw ConfigError("train.patience must be at least 1");
  if (weights.UsesFaithfulness() && !(imle.lambda > 0.0))
    throw ConfigError("imle.lambda must be positive when faithfulness terms are trained");
  if (!(optim.lr > 0.0)) throw ConfigError("optim.lr must be positive");
  if (!(optim.beta1 >= 0.0 && optim.beta1 < 1.0) || !(optim.beta2 >= 0.0 && optim.beta2 < 1.0))
    throw ConfigError("optim betas must lie in [0, 1)");
  if (!(optim.eps > 0.0)) throw ConfigError("optim.eps must be positive");
  if (!(aimle.target_rate > 0.0 && aimle.target_rate < 1.0))
    throw ConfigError("imle.target_rate must lie in (0, 1)");
  if (!(aimle.step_factor > 0.0)) throw ConfigError("imle.step_factor must be positive");
  if (!(aimle.ema_decay >= 0.0 && aimle.ema_decay < 1.0))
    throw ConfigError("imle.ema_decay must lie in [0, 1)");
}

LossGraph BuildLossGraph(Tape& tape, const ModelParams& params, const BoundModel& bound,
                         Batch batch, const LossWeights& w, const MaskSet* fixed) {
  if (batch.empty()) throw ContractViolation("loss graph: empty batch");
  w.Validate();
  if (fixed != nullptr && fixed->size() != batch.size())
    throw ContractViolation("loss graph: fixed masks do not match the batch");
  const bool faith = w.UsesFaithfulness();
  const std::size_t num_k = w.k_set.size();
  const double uniform_ce = std::log(static_cast<double>(params.config.num_classes));

  LossGraph g;
  std::vector<NodeId> task_terms, plaus_terms;
  std::vector<std::vector<NodeId>> suff_terms(num_k), comp_terms(num_k);

  for (std::size_t b = 0; b < batch.size(); ++b) {
    const Example& ex = *batch[b];
    const std::size_t n = ex.tokens.size();
    const NodeId hidden = TaskHidden(tape, params, bound, ex.tokens);
    const NodeId full_logits = TaskLogitsFromHidden(tape, params, bound, hidden, Ones(tape, n));
    const int target[1] = {ex.label};
    const NodeId ce_full = tape.SoftmaxCrossEntropy(full_logits, target);
    task_terms.push_back(ce_full);

    const bool plaus = w.alpha_p > 0.0 && ex.rationale.has_value();
    if (!faith && !plaus) {
      g.masks.emplace_back();
      continue;
    }
    const NodeId scores = ExtractorScores(tape, params, bound, ex.tokens);
    if (plaus) {
      const std::vector<double> gold(ex.rationale->begin(), ex.rationale->end());
      const std::vector<double> all(n, 1.0);
      plaus_terms.push_back(tape.BinaryCrossEntropyMasked(scores, gold, all, w.plaus_one_sided));
    }
    if (!faith) {
      g.masks.emplace_back();
      continue;
    }

    LossGraph::Selection sel{scores, {}, {}};
    std::vector<RationaleMask> masks;
    const std::vector<double> score_values = tape.value(scores).values;
    for (double v : score_values)
      if (!std::isfinite(v)) throw EvaluationError("non-finite extractor scores");
    for (std::size_t j = 0; j < num_k; ++j) {
      RationaleMask r = fixed ? (*fixed)[b].at(j) : TopkMask(score_values, w.k_set[j]);
      if (r.bits.size() != n) throw ContractViolation("loss graph: mask length mismatch");
      const NodeId mask = tape.Leaf(Tensor::Column(r.AsDoubles()), /*requires_grad=*/true);
      sel.masks.push_back(mask);
      sel.counts.push_back(r.cardinality);
      if (w.alpha_s > 0.0) {
        const NodeId ce_r = tape.SoftmaxCrossEntropy(
            TaskLogitsFromHidden(tape, params, bound, hidden, mask), target);
        const NodeId diff = tape.Add(ce_r, tape.MulScalar(ce_full, -1.0));
        suff_terms[j].push_back(MarginLoss(tape, diff, w.margin_s));
      }
      if (w.alpha_c > 0.0) {
        NodeId ce_c;
        if (r.cardinality >= n) {
          // Nothing left to attend to: the prediction is taken as uniform.
          ce_c = tape.Constant(Tensor::Scalar(uniform_ce));
        } else {
          const NodeId attend = tape.AddScalar(tape.MulScalar(mask, -1.0), 1.0);
          ce_c = tape.SoftmaxCrossEntropy(
              TaskLogitsFromHidden(tape, params, bound, hidden, attend), target);
        }
        const NodeId diff = tape.Add(ce_full, tape.MulScalar(ce_c, -1.0));
        comp_terms[j].push_back(MarginLoss(tape, diff, w.margin_c));
      }
      masks.push_back(std::move(r));
    }
    g.selections.push_back(std::move(sel));
    g.masks.push_back(std::move(masks));
  }

  NodeId total = tape.MeanOf(task_terms);
  g.values.task = tape.value(total).values[0];
  auto add_criterion = [&](std::vector<std::vector<NodeId>>& terms, double alpha,
                           std::vector<double>& out) {
    std::vector<NodeId> per_k;
    for (auto& t : terms) {
      per_k.push_back(tape.MeanOf(t));
      out.push_back(tape.value(per_k.back()).values[0]);
    }
    total = tape.Add(total, tape.MulScalar(tape.MeanOf(per_k), alpha));
  };
  if (faith && w.alpha_c > 0.0) add_criterion(comp_terms, w.alpha_c, g.values.comp);
  if (faith && w.alpha_s > 0.0) add_criterion(suff_terms, w.alpha_s, g.values.suff);
  if (!plaus_terms.empty()) {
    const NodeId plaus = tape.MeanOf(plaus_terms);
    g.values.plaus = tape.value(plaus).values[0];
    g.gold_count = plaus_terms.size();
    total = tape.Add(total, tape.MulScalar(plaus, w.alpha_p));
  }
  g.total = total;
  g.values.total = tape.value(total).values[0];
  return g;
}

LossEvaluation LossAndGradients(const ModelParams& params, Batch batch, const TrainConfig& cfg,
                                double lambda, Rng& noise) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw ContractViolation("imle: lambda must be positive and finite");
  Tape tape;
  const BoundModel bound = Bind(tape, params);
  const LossGraph g = BuildLossGraph(tape, params, bound, batch, cfg.weights);
  if (!std::isfinite(g.values.total)) throw EvaluationError("non-finite training loss");

  ImleConfig imle = cfg.imle;
  imle.lambda = lambda;
  LossEvaluation out;
  out.loss = g.values;
  std::vector<GradientSplice> splices;
  splices.reserve(g.selections.size());
  for (const LossGraph::Selection& sel : g.selections) {
    splices.push_back({sel.scores, [&out, &noise, &imle, &sel, lambda](const Tape& t) {
                         const std::vector<double>& s = t.value(sel.scores).values;
                         std::vector<double> extra(s.size(), 0.0);
                         for (std::size_t j = 0; j < sel.masks.size(); ++j) {
                           const ImleEstimate est =
                               ImleGradient(s, t.grad(sel.masks[j]), sel.counts[j], imle, noise);
                           out.masks_differed.push_back(est.differing_samples > 0 ? 1 : 0);
                           for (std::size_t i = 0; i < s.size(); ++i)
                             extra[i] += est.grad_scores[i] / lambda;
                         }
                         return extra;
                       }});
  }
  tape.Backward(g.total, splices);
  out.grads.reserve(bound.leaves.size());
  for (NodeId leaf : bound.leaves) {
    const auto grad = tape.grad(leaf);
    out.grads.emplace_back(grad.begin(), grad.end());
  }
  return out;
}

TrainerState::TrainerState(const TrainConfig& cfg)
    : params(BuildModel(cfg.model, cfg.seed)),
      aimle([&cfg] {
        AimleConfig a = cfg.aimle;
        a.initial_lambda = cfg.imle.lambda;
        return a;
      }()),
      noise(Rng::Stream(cfg.seed, "imle-noise")),
      lambda(cfg.imle.lambda) {}

StepResult TrainStep(TrainerState& state, Batch batch, const TrainConfig& cfg) {
  if (batch.empty()) throw ContractViolation("train step: empty batch");
  StepResult r;
  r.lambda_used = state.lambda;
  LossEvaluation ev;
  try {
    ev = LossAndGradients(state.params, batch, cfg, state.lambda, state.noise);
    const std::vector<Tensor*> tensors = state.params.Parameters();
    AdamStep(tensors, ev.grads, state.adam, cfg.optim);
  } catch (const EvaluationError&) {
    state.flagged = true;
    r.aborted = true;
    r.lambda_next = state.lambda;
    r.observed_rate = state.aimle.observed_rate();
    return r;
  }
  ++state.steps;
  if (cfg.aimle_enabled && !ev.masks_differed.empty())
    state.lambda = state.aimle.Update(ev.masks_differed);
  r.loss = std::move(ev.loss);
  r.lambda_next = state.lambda;
  r.observed_rate = state.aimle.observed_rate();
  r.selections = ev.masks_differed.size();
  r.masks_differed = static_cast<std::size_t>(
      std::count(ev.masks_differed.begin(), ev.masks_differed.end(), std::uint8_t{1}));
  return r;
}

LossBreakdown EvaluateLoss(const ModelParams& params, const Dataset& data, const TrainConfig& cfg) {
  if (data.empty()) throw ContractViolation("evaluate loss: empty dataset");
  const LossWeights& w = cfg.weights;
  const bool faith = w.UsesFaithfulness();
  std::vector<double> suff(faith && w.alpha_s > 0.0 ? w.k_set.size() : 0, 0.0);
  std::vector<double> comp(faith && w.alpha_c > 0.0 ? w.k_set.size() : 0, 0.0);
  double task = 0.0, plaus = 0.0;
  std::size_t gold = 0;
  for (std::size_t start = 0; start < data.size(); start += cfg.batch_size) {
    const std::size_t end = std::min(data.size(), start + cfg.batch_size);
    std::vector<const Example*> chunk;
    for (std::size_t i = start; i < end; ++i) chunk.push_back(&data[i]);
    Tape tape;
    const BoundModel bound = Bind(tape, params);
    const LossGraph g = BuildLossGraph(tape, params, bound, chunk, w);
    const double nb = static_cast<double>(chunk.size());
    task += g.values.task * nb;
    for (std::size_t j = 0; j < suff.size(); ++j) suff[j] += g.values.suff[j] * nb;
    for (std::size_t j = 0; j < comp.size(); ++j) comp[j] += g.values.comp[j] * nb;
    plaus += g.values.plaus * static_cast<double>(g.gold_count);
    gold += g.gold_count;
  }
  const double n = static_cast<double>(data.size());
  task /= n;
  for (double& v : suff) v /= n;
  for (double& v : comp) v /= n;
  plaus = gold > 0 ? plaus / static_cast<double>(gold) : 0.0;
  return TotalLoss(task, suff, comp, plaus, w);
}

double ResolvePlausK(const EvalConfig& cfg, const Dataset& data) {
  if (cfg.plaus_k > 0.0) return cfg.plaus_k;
  double sum = 0.0;
  std::size_t count = 0;
  for (const Example& ex : data) {
    if (!ex.rationale) continue;
    const auto ones = std::count(ex.rationale->begin(), ex.rationale->end(), std::uint8_t{1});
    sum += static_cast<double>(ones) / static_cast<double>(ex.rationale->size());
    ++count;
  }
  return count > 0 ? 100.0 * sum / static_cast<double>(count) : 50.0;
}

ExampleEvaluation EvaluateExample(const ModelParams& params, const Example& ex,
                                  std::span<const double> aopc_bins, double plaus_k) {
  const std::size_t n = ex.tokens.size();
  const std::size_t num_classes = params.config.num_classes;
  Tape tape;
  const BoundModel bound = Bind(tape, params);
  auto probs = [&](std::span<const int> tokens, const std::vector<double>& attend) {
    const NodeId mask = tape.Constant(Tensor::Column(attend));
    return Softmax(tape.value(TaskLogits(tape, params, bound, tokens, mask)).values);
  };

  ExampleEvaluation e;
  e.gold_label = ex.label;
  const std::vector<double> full = probs(ex.tokens, std::vector<double>(n, 1.0));
  e.predicted = Argmax(full);
  const auto y = static_cast<std::size_t>(e.predicted);
  e.prob_full = full[y];
  e.scores = tape.value(ExtractorScores(tape, params, bound, ex.tokens)).values;
  for (double k : aopc_bins) {
    const RationaleMask r = TopkMask(e.scores, k);
    const ReducedInput kept = RationaleInput(ex.tokens, r);
    e.prob_suff.push_back(probs(kept.tokens, kept.attend)[y]);
    if (r.cardinality >= n) {
      e.prob_comp.push_back(1.0 / static_cast<double>(num_classes));
    } else {
      const ReducedInput removed = ContrastInput(ex.tokens, r);
      e.prob_comp.push_back(probs(removed.tokens, removed.attend)[y]);
    }
  }
  e.pred_rationale = TopkMask(e.scores, plaus_k).bits;
  e.gold_rationale = ex.rationale;
  return e;
}

MetricReport EvaluateModel(const ModelParams& params, const Dataset& data, const EvalConfig& cfg,
                           const std::optional<NrgColumnBounds>& nrg_bounds) {
  if (data.empty()) throw ContractViolation("evaluate: empty dataset");
  cfg.Validate();
  const double plaus_k = ResolvePlausK(cfg, data);
  std::vector<ExampleEvaluation> evals;
  evals.reserve(data.size());
  for (const Example& ex : data) evals.push_back(EvaluateExample(params, ex, cfg.aopc_bins, plaus_k));
  MetricReport report = BuildReport(evals, params.config.num_classes, cfg.averaging);
  if (nrg_bounds) report.nrg = ReportNrg(report, *nrg_bounds, cfg.task_metric);
  return report;
}

EarlyStopper::EarlyStopper(std::size_t patience) : patience_(patience) {
  if (patience < 1) throw ContractViolation("early stopping: patience must be at least 1");
}

bool EarlyStopper::Observe(double value) {
  ++epoch_;
  improved_last_ = std::isfinite(value) && (best_epoch_ == 0 || value < best_);
  if (improved_last_) {
    best_ = value;
    best_epoch_ = epoch_;
  }
  return epoch_ - best_epoch_ >= patience_;
}

TrainingResult RunTraining(const TrainConfig& cfg, const Dataset& train, const Dataset& dev) {
  cfg.Validate();
  if (train.empty() || dev.empty()) throw ContractViolation("training: empty dataset");
  for (const Example& ex : train) ValidateExample(ex, cfg.model.num_classes);
  for (const Example& ex : dev) ValidateExample(ex, cfg.model.num_classes);
  const auto started = std::chrono::steady_clock::now();

  TrainerState state(cfg);
  Rng order_rng = Rng::Stream(cfg.seed, "batch-order");
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  EarlyStopper stopper(cfg.patience);

  TrainingResult result{state.params, {}};
  RunLog& log = result.log;
  log.seed = cfg.seed;
  log.config_snapshot = TrainConfigToJson(cfg);

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    order_rng.Shuffle(order.begin(), order.end());
    EpochLog el;
    el.epoch = epoch;
    double seen = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::vector<const Example*> batch;
      for (std::size_t i = start; i < end; ++i) batch.push_back(&train[order[i]]);
      const StepResult step = TrainStep(state, batch, cfg);
      if (step.aborted) {
        log.aborted = true;
        break;
      }
      const double nb = static_cast<double>(batch.size());
      LossBreakdown& t = el.train;
      t.task += step.loss.task * nb;
      t.plaus += step.loss.plaus * nb;
      t.total += step.loss.total * nb;
      t.suff.resize(step.loss.suff.size(), 0.0);
      t.comp.resize(step.loss.comp.size(), 0.0);
      for (std::size_t j = 0; j < t.suff.size(); ++j) t.suff[j] += step.loss.suff[j] * nb;
      for (std::size_t j = 0; j < t.comp.size(); ++j) t.comp[j] += step.loss.comp[j] * nb;
      seen += nb;
    }
    if (log.aborted) {
      log.stop_reason = "non-finite loss";
      break;
    }
    LossBreakdown& t = el.train;
    t.task /= seen;
    t.plaus /= seen;
    t.total /= seen;
    for (double& v : t.suff) v /= seen;
    for (double& v : t.comp) v /= seen;
    el.dev_loss = EvaluateLoss(state.params, dev, cfg);
    el.dev = EvaluateModel(state.params, dev, cfg.eval);
    el.lambda = state.lambda;
    el.observed_rate = state.aimle.observed_rate();
    log.epochs.push_back(std::move(el));

    const bool stop = stopper.Observe(log.epochs.back().dev_loss.total);
    if (stopper.improved_last()) {
      result.best = state.params;
      if (!cfg.checkpoint_dir.empty())
        SaveCheckpoint(result.best, std::filesystem::path(cfg.checkpoint_dir) / "best.ckpt.json");
    }
    if (stop) {
      log.stop_reason = "patience";
      break;
    }
  }
  if (log.stop_reason.empty()) log.stop_reason = "max-epochs";
  log.best_epoch = stopper.best_epoch();
  log.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

std::string TrainConfigToJson(const TrainConfig& c) {
  ordered_json j;
  j["model"] = {{"vocab_size", c.model.vocab_size},
                {"embed_dim", c.model.embed_dim},
                {"hidden_dim", c.model.hidden_dim},
                {"num_classes", c.model.num_classes},
                {"encoder", ToString(c.model.encoder)},
                {"variant", ToString(c.model.variant)},
                {"max_len", c.model.max_len}};
  j["loss"] = {{"alpha_c", c.weights.alpha_c},   {"alpha_s", c.weights.alpha_s},
               {"alpha_p", c.weights.alpha_p},   {"margin_s", c.weights.margin_s},
               {"margin_c", c.weights.margin_c}, {"k_set", c.weights.k_set},
               {"plaus_one_sided", c.weights.plaus_one_sided}};
  j["imle"] = {{"lambda", c.imle.lambda},
               {"noise_scale", c.imle.noise_scale},
               {"samples", c.imle.samples},
               {"aimle", c.aimle_enabled},
               {"target_rate", c.aimle.target_rate},
               {"step_factor", c.aimle.step_factor},
               {"ema_decay", c.aimle.ema_decay},
               {"dead_band", c.aimle.dead_band},
               {"initial_rate", c.aimle.initial_rate},
               {"min_lambda", c.aimle.min_lambda},
               {"max_lambda", c.aimle.max_lambda}};
  j["optim"] = {{"lr", c.optim.lr}, {"beta1", c.optim.beta1}, {"beta2", c.optim.beta2},
                {"eps", c.optim.eps}};
  j["train"] = {{"batch_size", c.batch_size},
                {"max_epochs", c.max_epochs},
                {"patience", c.patience},
                {"checkpoint_dir", c.checkpoint_dir}};
  j["eval"] = {{"aopc_bins", c.eval.aopc_bins},
               {"plaus_k", c.eval.plaus_k},
               {"averaging", ToString(c.eval.averaging)},
               {"task_metric", ToString(c.eval.task_metric)}};
  j["seed"] = c.seed;
  return j.dump(2);
}

std::string RunLogToJson(const RunLog& log) {
  ordered_json j;
  j["format"] = "ratex-runlog";
  j["version"] = 1;
  j["seed"] = log.seed;
  j["best_epoch"] = log.best_epoch;
  j["stop_reason"] = log.stop_reason;
  j["aborted"] = log.aborted;
  j["config"] = log.config_snapshot.empty() ? ordered_json() : ordered_json::parse(log.config_snapshot);
  ordered_json epochs = ordered_json::array();
  for (const EpochLog& e : log.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"train", BreakdownJson(e.train)},
                      {"dev_loss", BreakdownJson(e.dev_loss)},
                      {"dev", ReportJson(e.dev)},
                      {"lambda", e.lambda},
                      {"observed_rate", e.observed_rate}});
  }
  j["epochs"] = std::move(epochs);
  return j.dump(2);
}

std::string_view ToString(SweepAxis a) {
  switch (a) {
    case SweepAxis::kWeightGrid: return "weight-grid";
    case SweepAxis::kAnnotationFraction: return "annotation-fraction";
    case SweepAxis::kTopkTransfer: return "topk-transfer";
  }
  return "";
}

SweepAxis ParseSweepAxis(std::string_view s) {
  if (s == "weight-grid") return SweepAxis::kWeightGrid;
  if (s == "annotation-fraction") return SweepAxis::kAnnotationFraction;
  if (s == "topk-transfer") return SweepAxis::kTopkTransfer;
  throw ConfigError("unknown sweep axis '" + std::string(s) + "'");
}

std::vector<double> DefaultSweepValues(SweepAxis a) {
  switch (a) {
    case SweepAxis::kWeightGrid: return {0.0, 0.5, 1.0};
    case SweepAxis::kAnnotationFraction: return {0.001, 0.01, 0.1, 0.2, 0.5, 1.0};
    case SweepAxis::kTopkTransfer: return {20.0, 30.0, 40.0, 50.0, 60.0};
  }
  return {};
}

std::vector<SweepRow> RunSweep(const TrainConfig& base, const Dataset& train, const Dataset& dev,
                               const SweepConfig& sweep) {
  base.Validate();
  const std::vector<double> values =
      sweep.values.empty() ? DefaultSweepValues(sweep.axis) : sweep.values;
  if (values.empty()) throw ConfigError("sweep: axis values must not be empty");
  const std::string axis(ToString(sweep.axis));

  auto base_row = [&](const TrainConfig& cfg) {
    SweepRow row;
    row.axis = axis;
    row.alpha_f = cfg.weights.alpha_s;
    row.alpha_p = cfg.weights.alpha_p;
    row.seed = cfg.seed;
    row.k = ResolvePlausK(cfg.eval, dev);
    return row;
  };
  auto run_dir = [&](std::size_t i) {
    if (base.checkpoint_dir.empty()) return std::string();
    return (std::filesystem::path(base.checkpoint_dir) / ("run_" + std::to_string(i))).string();
  };

  if (sweep.axis == SweepAxis::kTopkTransfer) {
    TrainConfig cfg = base;
    cfg.weights.k_set = {sweep.train_k};
    cfg.checkpoint_dir = run_dir(0);
    const TrainingResult trained = RunTraining(cfg, train, dev);
    std::vector<SweepRow> rows(values.size());
    ParallelFor(values.size(), sweep.jobs, [&](std::size_t i) {
      EvalConfig eval = cfg.eval;
      eval.aopc_bins = {values[i]};
      eval.plaus_k = values[i];
      SweepRow row = base_row(cfg);
      row.k = values[i];
      row.best_epoch = trained.log.best_epoch;
      row.report = EvaluateModel(trained.best, dev, eval);
      rows[i] = std::move(row);
    });
    return rows;
  }

  struct Job {
    TrainConfig cfg;
    double fraction = 1.0;
  };
  std::vector<Job> jobs;
  if (sweep.axis == SweepAxis::kWeightGrid) {
    for (double af : values) {
      for (double ap : values) {
        Job job{base, 1.0};
        job.cfg.weights.SetFaithfulness(af);
        job.cfg.weights.alpha_p = ap;
        jobs.push_back(std::move(job));
      }
    }
  } else {
    for (double f : values) {
      if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("sweep: fractions must lie in [0, 1]");
      jobs.push_back(Job{base, f});
    }
  }
  std::vector<SweepRow> rows(jobs.size());
  ParallelFor(jobs.size(), sweep.jobs, [&](std::size_t i) {
    Job& job = jobs[i];
    job.cfg.checkpoint_dir = run_dir(i);
    const Dataset subset = job.fraction < 1.0 ? SubsampleGold(train, job.fraction, base.seed) : train;
    const TrainingResult trained = RunTraining(job.cfg, subset, dev);
    SweepRow row = base_row(job.cfg);
    row.fraction = job.fraction;
    row.best_epoch = trained.log.best_epoch;
    row.report = trained.log.epochs.empty() ? EvaluateModel(trained.best, dev, job.cfg.eval)
                                            : trained.log.epochs[trained.log.best_epoch - 1].dev;
    rows[i] = std::move(row);
  });
  return rows;
}

std::string SweepToCsv(std::span<const SweepRow> rows) {
  std::string out =
      "axis,alpha_f,alpha_p,fraction,k,seed,best_epoch,count,accuracy,macro_f1,suff_aopc,"
      "comp_aopc,tf1,auprc,iou_f1\n";
  for (const SweepRow& r : rows) {
    const MetricReport& m = r.report;
    out += r.axis + "," + Cell(r.alpha_f) + "," + Cell(r.alpha_p) + "," + Cell(r.fraction) + "," +
           Cell(r.k) + "," + std::to_string(r.seed) + "," + std::to_string(r.best_epoch) + "," +
           std::to_string(m.count) + "," + Cell(m.accuracy) + "," + Cell(m.macro_f1) + "," +
           Cell(m.suff_aopc) + "," + Cell(m.comp_aopc) + "," + Cell(m.tf1) + "," +
           Cell(m.auprc) + "," + Cell(m.iou_f1) + "\n";
  }
  return out;
}

std::string SweepToJson(std::span<const SweepRow> rows) {
  ordered_json arr = ordered_json::array();
  for (const SweepRow& r : rows) {
    arr.push_back({{"axis", r.axis},
                   {"alpha_f", r.alpha_f},
                   {"alpha_p", r.alpha_p},
                   {"fraction", r.fraction},
                   {"k", r.k},
                   {"seed", r.seed},
                   {"best_epoch", r.best_epoch},
                   {"report", ReportJson(r.report)}});
  }
  return arr.dump(2);
}

}  // namespace ratex
