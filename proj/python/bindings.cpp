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

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "ratex/config.hpp"
#include "ratex/data.hpp"
#include "ratex/error.hpp"
#include "ratex/gradcheck.hpp"
#include "ratex/losses.hpp"
#include "ratex/metrics.hpp"
#include "ratex/model.hpp"
#include "ratex/rng.hpp"
#include "ratex/topk.hpp"
#include "ratex/training.hpp"

namespace py = pybind11;

namespace {

using Bits = std::vector<std::uint8_t>;

py::dict ExampleToDict(const ratex::Example& ex) {
  py::dict d;
  d["id"] = ex.id;
  d["tokens"] = ex.tokens;
  d["label"] = ex.label;
  if (ex.rationale)
    d["rationale"] = *ex.rationale;
  else
    d["rationale"] = py::none();
  return d;
}

ratex::Example ExampleFromDict(const py::dict& d) {
  ratex::Example ex;
  ex.id = d.contains("id") ? d["id"].cast<std::string>() : std::string();
  ex.tokens = d["tokens"].cast<std::vector<int>>();
  ex.label = d["label"].cast<int>();
  if (d.contains("rationale") && !d["rationale"].is_none())
    ex.rationale = d["rationale"].cast<Bits>();
  return ex;
}

ratex::Dataset DatasetFromList(const py::list& items) {
  ratex::Dataset out;
  out.reserve(items.size());
  for (const py::handle& h : items) out.push_back(ExampleFromDict(h.cast<py::dict>()));
  return out;
}

py::list DatasetToList(const ratex::Dataset& data) {
  py::list out;
  for (const ratex::Example& ex : data) out.append(ExampleToDict(ex));
  return out;
}

ratex::RunConfig ConfigFromIni(const std::string& ini, const std::vector<std::string>& overrides) {
  ratex::RunConfig cfg;
  ratex::ApplyIni(cfg, ini, "<string>");
  for (const std::string& o : overrides) ratex::ApplyOverride(cfg, o);
  cfg.Validate();
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of ratex";

  py::register_exception<ratex::ContractViolation>(m, "ContractViolation", PyExc_ValueError);
  py::register_exception<ratex::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ratex::DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<ratex::DegenerateInput>(m, "DegenerateInput", PyExc_ValueError);
  py::register_exception<ratex::EvaluationError>(m, "EvaluationError", PyExc_RuntimeError);

  // top-k and estimators
  m.def("topk_cardinality", &ratex::TopkCardinality, py::arg("n"), py::arg("k_percent"));
  m.def(
      "topk_mask",
      [](const std::vector<double>& scores, double k) { return ratex::TopkMask(scores, k).bits; },
      py::arg("scores"), py::arg("k_percent"));
  m.def(
      "gumbel_sample",
      [](std::size_t n, double scale, std::uint64_t seed) {
        ratex::Rng rng(seed);
        return ratex::GumbelSample(n, scale, rng);
      },
      py::arg("n"), py::arg("scale") = 1.0, py::arg("seed") = 0);
  m.def(
      "imle_gradient",
      [](const std::vector<double>& scores, const std::vector<double>& grad_r, std::size_t count,
         double lam, double noise_scale, std::size_t samples, std::uint64_t seed) {
        ratex::Rng rng(seed);
        const ratex::ImleConfig cfg{.lambda = lam, .noise_scale = noise_scale, .samples = samples};
        cfg.Validate();
        const ratex::ImleEstimate e = ratex::ImleGradient(scores, grad_r, count, cfg, rng);
        return py::make_tuple(e.grad_scores, e.differing_samples);
      },
      py::arg("scores"), py::arg("grad_r"), py::arg("count"), py::arg("lam") = 1.0,
      py::arg("noise_scale") = 1.0, py::arg("samples") = 1, py::arg("seed") = 0);

  py::class_<ratex::AimleController>(m, "AimleController")
      .def(py::init([](double initial_lambda, double target_rate) {
             ratex::AimleConfig c;
             c.initial_lambda = initial_lambda;
             c.target_rate = target_rate;
             return ratex::AimleController(c);
           }),
           py::arg("initial_lambda") = 1.0, py::arg("target_rate") = 0.3)
      .def("update", [](ratex::AimleController& c, const Bits& flags) { return c.Update(flags); })
      .def_property_readonly("lam", &ratex::AimleController::lambda)
      .def_property_readonly("observed_rate", &ratex::AimleController::observed_rate);

  // losses
  m.def("sufficiency_loss", &ratex::SufficiencyLoss, py::arg("ce_rationale"), py::arg("ce_full"),
        py::arg("margin"));
  m.def("comprehensiveness_loss", &ratex::ComprehensivenessLoss, py::arg("ce_full"),
        py::arg("ce_contrast"), py::arg("margin"));
  m.def(
      "plausibility_loss",
      [](const std::vector<double>& scores, const Bits& gold, bool one_sided) {
        return ratex::PlausibilityLoss(scores, gold, one_sided);
      },
      py::arg("scores"), py::arg("gold"), py::arg("one_sided") = false);

  // metrics
  m.def(
      "aopc",
      [](const std::vector<double>& full, const std::vector<std::vector<double>>& reduced) {
        return ratex::Aopc(full, reduced);
      },
      py::arg("prob_full"), py::arg("prob_reduced"));
  m.def(
      "token_scores",
      [](const Bits& pred, const Bits& gold) {
        const ratex::TokenPrf s = ratex::TokenScores(pred, gold);
        py::dict d;
        d["precision"] = s.precision;
        d["recall"] = s.recall;
        d["f1"] = s.f1;
        d["iou"] = s.iou;
        return d;
      },
      py::arg("pred"), py::arg("gold"));
  m.def(
      "average_precision",
      [](const std::vector<double>& scores, const Bits& gold) {
        return ratex::AveragePrecision(scores, gold);
      },
      py::arg("scores"), py::arg("gold"));
  m.def(
      "classification_metrics",
      [](const std::vector<int>& preds, const std::vector<int>& golds, std::size_t m) {
        const ratex::ClassificationScores s = ratex::ClassificationMetrics(preds, golds, m);
        return py::make_tuple(s.accuracy, s.macro_f1);
      },
      py::arg("preds"), py::arg("golds"), py::arg("num_classes"));
  m.def(
      "nrg_csv",
      [](const std::string& csv) {
        const auto rows = ratex::ParseNrgCsv(csv);
        return ratex::NrgToCsv(rows, ratex::NrgCompose(rows));
      },
      py::arg("csv"), "NRG columns appended to a raw-metric CSV");
  m.def(
      "nrg_compose",
      [](const std::vector<std::vector<double>>& rows) {
        std::vector<ratex::NrgInputRow> in;
        for (const auto& r : rows) {
          if (r.size() != 5) throw ratex::ContractViolation("nrg rows need comp, suff, tf1, auprc, task");
          in.push_back({"", r[0], r[1], r[2], r[3], r[4]});
        }
        std::vector<std::vector<double>> out;
        for (const ratex::NrgScores& s : ratex::NrgCompose(in))
          out.push_back({s.fnrg, s.pnrg, s.tnrg, s.cnrg});
        return out;
      },
      py::arg("rows"), "Rows of (comp, suff, tf1, auprc, task) to (fnrg, pnrg, tnrg, cnrg)");

  // data
  m.def(
      "generate_synthetic",
      [](std::size_t num_examples, std::uint64_t seed, std::size_t seq_len, std::size_t span_len,
         std::size_t vocab_size, std::size_t num_classes) {
        ratex::SyntheticSpec s;
        s.num_examples = num_examples;
        s.seed = seed;
        s.seq_len_min = s.seq_len_max = seq_len;
        s.span_len_min = s.span_len_max = span_len;
        s.vocab_size = vocab_size;
        s.num_classes = num_classes;
        return DatasetToList(ratex::GenerateSynthetic(s));
      },
      py::arg("num_examples") = 100, py::arg("seed") = 0, py::arg("seq_len") = 20,
      py::arg("span_len") = 4, py::arg("vocab_size") = 200, py::arg("num_classes") = 2);
  m.def(
      "subsample_gold",
      [](const py::list& data, double fraction, std::uint64_t seed) {
        return DatasetToList(ratex::SubsampleGold(DatasetFromList(data), fraction, seed));
      },
      py::arg("data"), py::arg("fraction"), py::arg("seed") = 0);

  // training and evaluation; JSON payloads are decoded on the Python side
  m.def(
      "train",
      [](const std::string& ini, const std::vector<std::string>& overrides) {
        const ratex::RunConfig cfg = ConfigFromIni(ini, overrides);
        ratex::TrainingResult r;
        {
          py::gil_scoped_release release;
          const ratex::LoadedData d = ratex::LoadData(cfg);
          r = ratex::RunTraining(cfg.Train(), d.train, d.dev);
        }
        py::dict out;
        out["checkpoint"] = ratex::CheckpointToString(r.best);
        out["run_log"] = ratex::RunLogToJson(r.log);
        out["dev_report"] = r.log.best_epoch > 0
                                ? ratex::ReportToJson(r.log.epochs[r.log.best_epoch - 1].dev)
                                : std::string("null");
        return out;
      },
      py::arg("ini") = "", py::arg("overrides") = std::vector<std::string>{});
  m.def(
      "evaluate",
      [](const std::string& checkpoint, const py::list& data, const std::string& ini,
         const std::vector<std::string>& overrides) {
        const ratex::RunConfig cfg = ConfigFromIni(ini, overrides);
        const ratex::ModelParams params = ratex::CheckpointFromString(checkpoint);
        const ratex::Dataset d = DatasetFromList(data);
        py::gil_scoped_release release;
        return ratex::ReportToJson(ratex::EvaluateModel(params, d, cfg.train.eval));
      },
      py::arg("checkpoint"), py::arg("data"), py::arg("ini") = "",
      py::arg("overrides") = std::vector<std::string>{});
  m.def("default_config", [] { return ratex::RunConfigToIni(ratex::RunConfig{}); });

  m.def(
      "gradcheck",
      [](std::uint64_t seed, double h, double tol) {
        py::list out;
        auto add = [&out](const ratex::CheckOutcome& o) {
          py::dict d;
          d["name"] = o.name;
          d["passed"] = o.passed;
          d["max_rel_error"] = o.max_rel_error;
          out.append(d);
        };
        for (const ratex::CheckOutcome& o : ratex::CheckOpCatalog(seed, h, tol)) add(o);
        for (auto e : {ratex::EncoderKind::kMeanPoolMlp, ratex::EncoderKind::kSingleHeadAttention})
          for (auto v : {ratex::Variant::kShared, ratex::Variant::kDual})
            add(ratex::CheckEndToEnd(seed, e, v, h, tol));
        return out;
      },
      py::arg("seed") = 0, py::arg("h") = 1e-5, py::arg("tol") = 1e-4);
}
