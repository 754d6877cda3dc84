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

// ratex: synthesize data, train, evaluate, sweep, check gradients and
// compose NRG tables.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or config error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "ratex/config.hpp"
#include "ratex/error.hpp"
#include "ratex/gradcheck.hpp"
#include "ratex/io.hpp"
#include "ratex/metrics.hpp"
#include "ratex/model.hpp"
#include "ratex/training.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct Common {
  std::string config;
  std::vector<std::string> overrides;
  std::string out;
  std::optional<std::uint64_t> seed;
};

void AddCommon(CLI::App* cmd, Common& c, bool out_required) {
  cmd->add_option("--config", c.config, "INI config file")->check(CLI::ExistingFile);
  cmd->add_option("--set", c.overrides, "Override, section.key=value (repeatable)");
  auto* out = cmd->add_option("--out", c.out, "Output directory");
  if (out_required) out->required();
  cmd->add_option("--seed", c.seed, "Seed overriding the config");
}

ratex::RunConfig Resolve(const Common& c) {
  std::vector<std::string> overrides = c.overrides;
  if (c.seed) overrides.push_back("seed=" + std::to_string(*c.seed));
  std::optional<fs::path> path;
  if (!c.config.empty()) path = c.config;
  return ratex::LoadRunConfig(path, overrides);
}

ratex::LoadedData Data(const ratex::RunConfig& cfg) {
  ratex::LoadedData d = ratex::LoadData(cfg);
  for (const std::string& diag : d.diagnostics) std::cerr << "warning: " << diag << "\n";
  return d;
}

void WriteSnapshot(const fs::path& out, const ratex::RunConfig& cfg) {
  ratex::WriteTextFile(out / "config.ini", ratex::RunConfigToIni(cfg));
}

int CmdSynth(const Common& c) {
  const ratex::RunConfig cfg = Resolve(c);
  const ratex::LoadedData d = Data(cfg);
  const fs::path out = c.out;
  ratex::SaveJsonl(d.train, out / "train.jsonl");
  ratex::SaveJsonl(d.dev, out / "dev.jsonl");
  WriteSnapshot(out, cfg);
  std::cout << "wrote " << d.train.size() << " train and " << d.dev.size() << " dev examples to "
            << out.string() << "\n";
  return kExitOk;
}

int CmdTrain(const Common& c) {
  const ratex::RunConfig cfg = Resolve(c);
  const ratex::LoadedData d = Data(cfg);
  const ratex::TrainingResult r = ratex::RunTraining(cfg.Train(), d.train, d.dev);
  const fs::path out = c.out;
  ratex::SaveCheckpoint(r.best, out / "checkpoint.json");
  ratex::WriteTextFile(out / "run_log.json", ratex::RunLogToJson(r.log));
  ratex::WriteTextFile(out / "timing.json",
                       ordered_json{{"wall_time_s", r.log.wall_time_s}}.dump(2));
  WriteSnapshot(out, cfg);
  if (r.log.best_epoch > 0) {
    const ratex::MetricReport& dev = r.log.epochs[r.log.best_epoch - 1].dev;
    ratex::WriteTextFile(out / "dev_report.json", ratex::ReportToJson(dev));
    std::printf("best epoch %zu of %zu: dev accuracy %.4f, suff-aopc %.4f, comp-aopc %.4f",
                r.log.best_epoch, r.log.epochs.size(), dev.accuracy, dev.suff_aopc,
                dev.comp_aopc);
    if (dev.tf1) std::printf(", tf1 %.4f", *dev.tf1);
    std::printf("\n");
  }
  if (r.log.aborted) {
    std::cerr << "error: training aborted after a non-finite loss\n";
    return kExitRuntime;
  }
  return kExitOk;
}

int CmdEval(const Common& c, const std::string& checkpoint, const std::string& data_path,
            const std::string& compare) {
  const ratex::RunConfig cfg = Resolve(c);
  const ratex::ModelParams params = ratex::LoadCheckpoint(checkpoint);
  ratex::Dataset data;
  if (data_path.empty()) {
    data = Data(cfg).dev;
  } else {
    ratex::LoadResult loaded = ratex::LoadJsonl(data_path, params.config.num_classes);
    for (const std::string& diag : loaded.diagnostics)
      std::cerr << "warning: " << data_path << ": " << diag << "\n";
    data = std::move(loaded.data);
  }
  ratex::MetricReport report = ratex::EvaluateModel(params, data, cfg.train.eval);
  if (!compare.empty() && report.tf1 && report.auprc) {
    std::vector<ratex::NrgInputRow> rows = ratex::ParseNrgCsv(ratex::ReadTextFile(compare));
    ratex::NrgInputRow self{"model", report.comp_aopc, report.suff_aopc, *report.tf1,
                            *report.auprc,
                            cfg.train.eval.task_metric == ratex::TaskMetric::kAccuracy
                                ? report.accuracy
                                : report.macro_f1};
    rows.push_back(self);
    report.nrg = ratex::ReportNrg(report, ratex::BoundsFromRows(rows), cfg.train.eval.task_metric);
  }
  const fs::path out = c.out;
  ratex::WriteTextFile(out / "report.json", ratex::ReportToJson(report));
  WriteSnapshot(out, cfg);
  std::printf("accuracy %.4f, macro-f1 %.4f, suff-aopc %.4f, comp-aopc %.4f", report.accuracy,
              report.macro_f1, report.suff_aopc, report.comp_aopc);
  if (report.tf1) std::printf(", tf1 %.4f, auprc %.4f", *report.tf1, *report.auprc);
  else std::printf(", plausibility n/a");
  std::printf("\n");
  return kExitOk;
}

int CmdSweep(const Common& c, std::optional<std::size_t> jobs) {
  ratex::RunConfig cfg = Resolve(c);
  if (jobs) cfg.sweep.jobs = *jobs;
  if (cfg.sweep.jobs < 1) throw ratex::ConfigError("--jobs must be at least 1");
  const ratex::LoadedData d = Data(cfg);
  const std::vector<ratex::SweepRow> rows = ratex::RunSweep(cfg.Train(), d.train, d.dev, cfg.sweep);
  const fs::path out = c.out;
  const std::string csv = ratex::SweepToCsv(rows);
  ratex::WriteTextFile(out / "sweep.csv", csv);
  ratex::WriteTextFile(out / "sweep.json", ratex::SweepToJson(rows));
  WriteSnapshot(out, cfg);
  std::cout << csv;
  return kExitOk;
}

int CmdGradcheck(const Common& c, std::size_t seeds, double h, double tol) {
  const ratex::RunConfig cfg = Resolve(c);
  if (seeds < 1) throw ratex::ConfigError("--seeds must be at least 1");
  std::vector<ratex::CheckOutcome> ops;
  for (std::size_t s = 0; s < seeds; ++s) {
    const auto batch = ratex::CheckOpCatalog(cfg.seed + s, h, tol);
    if (ops.empty()) {
      ops = batch;
      continue;
    }
    for (std::size_t i = 0; i < ops.size(); ++i) {
      ops[i].passed = ops[i].passed && batch[i].passed;
      ops[i].max_rel_error = std::max(ops[i].max_rel_error, batch[i].max_rel_error);
      ops[i].checks += batch[i].checks;
    }
  }
  std::vector<ratex::CheckOutcome> e2e;
  for (auto enc : {ratex::EncoderKind::kMeanPoolMlp, ratex::EncoderKind::kSingleHeadAttention}) {
    for (auto var : {ratex::Variant::kShared, ratex::Variant::kDual}) {
      ratex::CheckOutcome total;
      total.passed = true;
      for (std::size_t s = 0; s < seeds; ++s) {
        const ratex::CheckOutcome o = ratex::CheckEndToEnd(cfg.seed + s, enc, var, h, tol);
        total.name = o.name;
        total.passed = total.passed && o.passed;
        total.max_rel_error = std::max(total.max_rel_error, o.max_rel_error);
        total.checks += o.checks;
      }
      e2e.push_back(total);
    }
  }
  bool all = true;
  ordered_json j{{"h", h}, {"tol", tol}, {"seeds", seeds}};
  auto emit = [&](const char* key, const std::vector<ratex::CheckOutcome>& list) {
    ordered_json arr = ordered_json::array();
    for (const auto& o : list) {
      std::printf("%-40s %-4s max_rel_error %.3e over %zu checks\n", o.name.c_str(),
                  o.passed ? "PASS" : "FAIL", o.max_rel_error, o.checks);
      arr.push_back({{"name", o.name}, {"passed", o.passed}, {"max_rel_error", o.max_rel_error},
                     {"checks", o.checks}});
      all = all && o.passed;
    }
    j[key] = std::move(arr);
  };
  emit("ops", ops);
  emit("end_to_end", e2e);
  j["passed"] = all;
  if (!c.out.empty()) ratex::WriteTextFile(fs::path(c.out) / "gradcheck.json", j.dump(2));
  std::printf("%s\n", all ? "gradcheck: all passed" : "gradcheck: FAILED");
  return all ? kExitOk : kExitRuntime;
}

int CmdNrg(const std::string& input, const std::string& out) {
  const std::vector<ratex::NrgInputRow> rows = ratex::ParseNrgCsv(ratex::ReadTextFile(input));
  const std::vector<ratex::NrgScores> scores = ratex::NrgCompose(rows);
  const std::string csv = ratex::NrgToCsv(rows, scores);
  if (out.empty()) std::cout << csv;
  else ratex::WriteTextFile(out, csv);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ratex: rationale extraction with faithfulness and plausibility objectives"};
  app.require_subcommand(1);

  Common synth_c, train_c, eval_c, sweep_c, grad_c;
  auto* synth = app.add_subcommand("synth", "Write a synthetic train/dev split as JSONL");
  AddCommon(synth, synth_c, true);

  auto* train = app.add_subcommand("train", "Train and write checkpoint, run log and snapshot");
  AddCommon(train, train_c, true);

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint and write a metric report");
  AddCommon(eval, eval_c, true);
  std::string checkpoint, data_path, compare;
  eval->add_option("--checkpoint", checkpoint, "Checkpoint JSON")->required()->check(CLI::ExistingFile);
  eval->add_option("--data", data_path, "JSONL dataset (default: the config's dev split)")
      ->check(CLI::ExistingFile);
  eval->add_option("--compare", compare, "Raw-metric CSV of other systems; adds NRG to the report")
      ->check(CLI::ExistingFile);

  auto* sweep = app.add_subcommand("sweep", "Run a weight-grid, annotation-fraction or top-k sweep");
  AddCommon(sweep, sweep_c, true);
  std::optional<std::size_t> jobs;
  sweep->add_option("--jobs", jobs, "Concurrent runs");

  auto* grad = app.add_subcommand("gradcheck", "Finite-difference check of every op and the full loss");
  AddCommon(grad, grad_c, false);
  std::size_t seeds = 100;
  double h = 1e-5, tol = 1e-4;
  grad->add_option("--seeds", seeds, "Random seeds per check");
  grad->add_option("--step", h, "Finite-difference step");
  grad->add_option("--tol", tol, "Relative error tolerance");

  auto* nrg = app.add_subcommand("nrg", "Append FNRG/PNRG/TNRG/CNRG to a raw-metric CSV");
  std::string nrg_in, nrg_out;
  nrg->add_option("--input", nrg_in, "CSV with columns system,comp,suff,tf1,auprc,task")
      ->required()
      ->check(CLI::ExistingFile);
  nrg->add_option("--out", nrg_out, "Output CSV (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*synth) return CmdSynth(synth_c);
    if (*train) return CmdTrain(train_c);
    if (*eval) return CmdEval(eval_c, checkpoint, data_path, compare);
    if (*sweep) return CmdSweep(sweep_c, jobs);
    if (*grad) return CmdGradcheck(grad_c, seeds, h, tol);
    if (*nrg) return CmdNrg(nrg_in, nrg_out);
  } catch (const ratex::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
