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

#include "ratex/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "ratex/error.hpp"

namespace ratex {
namespace {

using nlohmann::ordered_json;

double F1(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

struct Counts {
  std::size_t tp = 0, fp = 0, fn = 0;
};

Counts CountOverlap(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gold) {
  if (pred.size() != gold.size()) throw ContractViolation("token scores: length mismatch");
  Counts c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] && gold[i]) ++c.tp;
    else if (pred[i]) ++c.fp;
    else if (gold[i]) ++c.fn;
  }
  return c;
}

bool AnyGold(std::span<const std::uint8_t> gold) {
  return std::any_of(gold.begin(), gold.end(), [](std::uint8_t g) { return g != 0; });
}

ordered_json Opt(const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(); }

std::optional<double> OptFrom(const ordered_json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

ordered_json StratumJson(const StratumReport& s) {
  return ordered_json{{"count", s.count},     {"suff_aopc", s.suff_aopc}, {"comp_aopc", s.comp_aopc},
                      {"tf1", Opt(s.tf1)},    {"auprc", Opt(s.auprc)},    {"iou_f1", Opt(s.iou_f1)}};
}

StratumReport StratumFromJson(const ordered_json& j) {
  StratumReport s;
  s.count = j.at("count").get<std::size_t>();
  s.suff_aopc = j.at("suff_aopc").get<double>();
  s.comp_aopc = j.at("comp_aopc").get<double>();
  s.tf1 = OptFrom(j, "tf1");
  s.auprc = OptFrom(j, "auprc");
  s.iou_f1 = OptFrom(j, "iou_f1");
  return s;
}

std::string Trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(Trim(cell));
  return out;
}

}  // namespace

double Aopc(std::span<const double> prob_full, std::span<const std::vector<double>> prob_reduced) {
  if (prob_full.size() != prob_reduced.size()) throw ContractViolation("aopc: length mismatch");
  if (prob_full.empty()) throw ContractViolation("aopc: no examples");
  double total = 0.0;
  std::size_t terms = 0;
  for (std::size_t i = 0; i < prob_full.size(); ++i) {
    if (prob_reduced[i].empty()) throw ContractViolation("aopc: empty bin set");
    for (double r : prob_reduced[i]) {
      total += prob_full[i] - r;
      ++terms;
    }
  }
  return total / static_cast<double>(terms);
}

TokenPrf TokenScores(std::span<const std::uint8_t> pred, std::span<const std::uint8_t> gold) {
  if (!AnyGold(gold)) throw ContractViolation("token scores: gold selects no token");
  const Counts c = CountOverlap(pred, gold);
  TokenPrf s;
  s.precision = c.tp + c.fp > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
  s.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  s.f1 = F1(s.precision, s.recall);
  s.iou = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp + c.fn);
  return s;
}

std::string_view ToString(Averaging a) { return a == Averaging::kMicro ? "micro" : "macro"; }

Averaging ParseAveraging(std::string_view s) {
  if (s == "micro") return Averaging::kMicro;
  if (s == "macro") return Averaging::kMacro;
  throw ConfigError("unknown averaging '" + std::string(s) + "'");
}

CorpusPlausibility CorpusTokenScores(std::span<const std::vector<std::uint8_t>> preds,
                                     std::span<const std::vector<std::uint8_t>> golds,
                                     Averaging averaging) {
  if (preds.size() != golds.size()) throw ContractViolation("token scores: count mismatch");
  CorpusPlausibility out;
  Counts total;
  double f1_sum = 0.0;
  std::size_t matched = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (!AnyGold(golds[i])) {
      ++out.excluded;
      continue;
    }
    const Counts c = CountOverlap(preds[i], golds[i]);
    total.tp += c.tp;
    total.fp += c.fp;
    total.fn += c.fn;
    const TokenPrf s = TokenScores(preds[i], golds[i]);
    f1_sum += s.f1;
    if (s.iou >= kIouMatchThreshold) ++matched;
    ++out.instances;
  }
  if (out.instances == 0) return out;
  if (averaging == Averaging::kMicro) {
    const double p = total.tp + total.fp > 0
                         ? static_cast<double>(total.tp) / static_cast<double>(total.tp + total.fp)
                         : 0.0;
    const double r = static_cast<double>(total.tp) / static_cast<double>(total.tp + total.fn);
    out.tf1 = F1(p, r);
  } else {
    out.tf1 = f1_sum / static_cast<double>(out.instances);
  }
  out.iou_f1 = static_cast<double>(matched) / static_cast<double>(out.instances);
  return out;
}

double AveragePrecision(std::span<const double> scores, std::span<const std::uint8_t> gold) {
  if (scores.size() != gold.size()) throw ContractViolation("auprc: length mismatch");
  const auto positives = static_cast<std::size_t>(std::count_if(
      gold.begin(), gold.end(), [](std::uint8_t g) { return g != 0; }));
  if (positives == 0) throw ContractViolation("auprc: no gold tokens");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double ap = 0.0, prev_recall = 0.0;
  std::size_t tp = 0, seen = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double threshold = scores[order[i]];
    while (i < order.size() && scores[order[i]] == threshold) {
      tp += gold[order[i]] ? 1 : 0;
      ++seen;
      ++i;
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(positives);
    const double precision = static_cast<double>(tp) / static_cast<double>(seen);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return ap;
}

double Auprc(std::span<const std::vector<double>> scores,
             std::span<const std::vector<std::uint8_t>> golds) {
  if (scores.size() != golds.size()) throw ContractViolation("auprc: count mismatch");
  std::vector<double> s;
  std::vector<std::uint8_t> g;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i].size() != golds[i].size()) throw ContractViolation("auprc: length mismatch");
    s.insert(s.end(), scores[i].begin(), scores[i].end());
    g.insert(g.end(), golds[i].begin(), golds[i].end());
  }
  return AveragePrecision(s, g);
}

ClassificationScores ClassificationMetrics(std::span<const int> preds, std::span<const int> golds,
                                           std::size_t num_classes) {
  if (preds.size() != golds.size() || preds.empty())
    throw ContractViolation("classification metrics: empty or mismatched inputs");
  std::vector<std::size_t> tp(num_classes, 0), fp(num_classes, 0), fn(num_classes, 0);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const int p = preds[i], g = golds[i];
    if (p < 0 || g < 0 || static_cast<std::size_t>(p) >= num_classes ||
        static_cast<std::size_t>(g) >= num_classes)
      throw ContractViolation("classification metrics: label out of range");
    if (p == g) {
      ++correct;
      ++tp[static_cast<std::size_t>(p)];
    } else {
      ++fp[static_cast<std::size_t>(p)];
      ++fn[static_cast<std::size_t>(g)];
    }
  }
  ClassificationScores out;
  out.accuracy = static_cast<double>(correct) / static_cast<double>(preds.size());
  double f1_sum = 0.0;
  for (std::size_t c = 0; c < num_classes; ++c) {
    const double denom = static_cast<double>(2 * tp[c] + fp[c] + fn[c]);
    f1_sum += denom > 0.0 ? 2.0 * static_cast<double>(tp[c]) / denom : 0.0;
  }
  out.macro_f1 = f1_sum / static_cast<double>(num_classes);
  return out;
}

double NormalizeColumn(double v, const ColumnBounds& b) {
  if (b.max < b.min) throw ContractViolation("nrg: column max below min");
  const double span = b.max - b.min;
  if (span == 0.0) return 1.0;
  return b.higher_better ? (v - b.min) / span : (b.max - v) / span;
}

NrgColumnBounds BoundsFromRows(std::span<const NrgInputRow> rows) {
  if (rows.size() < 2) throw ContractViolation("nrg: at least two systems are required");
  NrgColumnBounds b;
  auto fold = [&rows](ColumnBounds& cb, double NrgInputRow::*field) {
    cb.min = cb.max = rows[0].*field;
    for (const NrgInputRow& r : rows) {
      cb.min = std::min(cb.min, r.*field);
      cb.max = std::max(cb.max, r.*field);
    }
  };
  fold(b.comp, &NrgInputRow::comp);
  fold(b.suff, &NrgInputRow::suff);
  fold(b.tf1, &NrgInputRow::tf1);
  fold(b.auprc, &NrgInputRow::auprc);
  fold(b.task, &NrgInputRow::task);
  return b;
}

NrgScores NrgForRow(const NrgInputRow& row, const NrgColumnBounds& b) {
  NrgScores s;
  s.fnrg = (NormalizeColumn(row.comp, b.comp) + NormalizeColumn(row.suff, b.suff)) / 2.0;
  s.pnrg = (NormalizeColumn(row.tf1, b.tf1) + NormalizeColumn(row.auprc, b.auprc)) / 2.0;
  s.tnrg = NormalizeColumn(row.task, b.task);
  s.cnrg = (s.fnrg + s.pnrg + s.tnrg) / 3.0;
  return s;
}

std::vector<NrgScores> NrgCompose(std::span<const NrgInputRow> rows,
                                  const std::optional<NrgColumnBounds>& bounds) {
  const NrgColumnBounds b = bounds ? *bounds : BoundsFromRows(rows);
  std::vector<NrgScores> out;
  out.reserve(rows.size());
  for (const NrgInputRow& r : rows) out.push_back(NrgForRow(r, b));
  return out;
}

StratumReport ComputeStratum(std::span<const ExampleEvaluation> evals, Averaging averaging) {
  StratumReport s;
  s.count = evals.size();
  if (evals.empty()) return s;
  std::vector<double> full;
  std::vector<std::vector<double>> suff, comp;
  std::vector<std::vector<std::uint8_t>> preds, golds;
  std::vector<std::vector<double>> scores;
  for (const ExampleEvaluation& e : evals) {
    full.push_back(e.prob_full);
    suff.push_back(e.prob_suff);
    comp.push_back(e.prob_comp);
    if (e.gold_rationale) {
      preds.push_back(e.pred_rationale);
      golds.push_back(*e.gold_rationale);
      scores.push_back(e.scores);
    }
  }
  s.suff_aopc = Aopc(full, suff);
  s.comp_aopc = Aopc(full, comp);
  if (!golds.empty()) {
    const CorpusPlausibility p = CorpusTokenScores(preds, golds, averaging);
    if (p.instances > 0) {
      s.tf1 = p.tf1;
      s.iou_f1 = p.iou_f1;
      s.auprc = Auprc(scores, golds);
    }
  }
  return s;
}

MetricReport StratifiedReport(std::span<const ExampleEvaluation> evals,
                              std::span<const std::uint8_t> correct, std::size_t num_classes,
                              Averaging averaging) {
  if (correct.size() != evals.size()) throw ContractViolation("stratified report: flag count mismatch");
  MetricReport r;
  const StratumReport all = ComputeStratum(evals, averaging);
  r.count = all.count;
  r.suff_aopc = all.suff_aopc;
  r.comp_aopc = all.comp_aopc;
  r.tf1 = all.tf1;
  r.auprc = all.auprc;
  r.iou_f1 = all.iou_f1;
  std::vector<int> preds, golds;
  std::vector<ExampleEvaluation> right, wrong;
  for (std::size_t i = 0; i < evals.size(); ++i) {
    preds.push_back(evals[i].predicted);
    golds.push_back(evals[i].gold_label);
    (correct[i] ? right : wrong).push_back(evals[i]);
  }
  const ClassificationScores cls = ClassificationMetrics(preds, golds, num_classes);
  r.accuracy = cls.accuracy;
  r.macro_f1 = cls.macro_f1;
  if (!right.empty()) r.correct = ComputeStratum(right, averaging);
  if (!wrong.empty()) r.incorrect = ComputeStratum(wrong, averaging);
  return r;
}

MetricReport BuildReport(std::span<const ExampleEvaluation> evals, std::size_t num_classes,
                         Averaging averaging) {
  std::vector<std::uint8_t> flags;
  flags.reserve(evals.size());
  for (const ExampleEvaluation& e : evals) flags.push_back(e.predicted == e.gold_label ? 1 : 0);
  return StratifiedReport(evals, flags, num_classes, averaging);
}

TaskMetric ParseTaskMetric(std::string_view s) {
  if (s == "accuracy") return TaskMetric::kAccuracy;
  if (s == "macro-f1") return TaskMetric::kMacroF1;
  throw ConfigError("unknown task metric '" + std::string(s) + "'");
}

std::string_view ToString(TaskMetric m) {
  return m == TaskMetric::kAccuracy ? "accuracy" : "macro-f1";
}

std::optional<NrgScores> ReportNrg(const MetricReport& report, const NrgColumnBounds& bounds,
                                   TaskMetric task_metric) {
  if (!report.tf1 || !report.auprc) return std::nullopt;
  NrgInputRow row;
  row.comp = report.comp_aopc;
  row.suff = report.suff_aopc;
  row.tf1 = *report.tf1;
  row.auprc = *report.auprc;
  row.task = task_metric == TaskMetric::kAccuracy ? report.accuracy : report.macro_f1;
  return NrgForRow(row, bounds);
}

std::string ReportToJson(const MetricReport& r, int indent) {
  ordered_json j;
  j["count"] = r.count;
  j["suff_aopc"] = r.suff_aopc;
  j["comp_aopc"] = r.comp_aopc;
  j["tf1"] = Opt(r.tf1);
  j["auprc"] = Opt(r.auprc);
  j["iou_f1"] = Opt(r.iou_f1);
  j["accuracy"] = r.accuracy;
  j["macro_f1"] = r.macro_f1;
  j["stratified"] = ordered_json{
      {"correct", r.correct ? StratumJson(*r.correct) : ordered_json()},
      {"incorrect", r.incorrect ? StratumJson(*r.incorrect) : ordered_json()}};
  if (r.nrg) {
    j["nrg"] = ordered_json{
        {"fnrg", r.nrg->fnrg}, {"pnrg", r.nrg->pnrg}, {"tnrg", r.nrg->tnrg}, {"cnrg", r.nrg->cnrg}};
  } else {
    j["nrg"] = nullptr;
  }
  return j.dump(indent);
}

MetricReport ReportFromJson(std::string_view text) {
  const ordered_json j = ordered_json::parse(text);
  MetricReport r;
  r.count = j.at("count").get<std::size_t>();
  r.suff_aopc = j.at("suff_aopc").get<double>();
  r.comp_aopc = j.at("comp_aopc").get<double>();
  r.tf1 = OptFrom(j, "tf1");
  r.auprc = OptFrom(j, "auprc");
  r.iou_f1 = OptFrom(j, "iou_f1");
  r.accuracy = j.at("accuracy").get<double>();
  r.macro_f1 = j.at("macro_f1").get<double>();
  const ordered_json& st = j.at("stratified");
  if (!st.at("correct").is_null()) r.correct = StratumFromJson(st.at("correct"));
  if (!st.at("incorrect").is_null()) r.incorrect = StratumFromJson(st.at("incorrect"));
  if (j.contains("nrg") && !j.at("nrg").is_null()) {
    const ordered_json& n = j.at("nrg");
    r.nrg = NrgScores{n.at("fnrg").get<double>(), n.at("pnrg").get<double>(),
                      n.at("tnrg").get<double>(), n.at("cnrg").get<double>()};
  }
  return r;
}

std::vector<NrgInputRow> ParseNrgCsv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::vector<std::string> header;
  std::vector<NrgInputRow> rows;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = Trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto cells = SplitCsv(line);
    if (header.empty()) {
      header = cells;
      for (const char* need : {"system", "comp", "suff", "tf1", "auprc", "task"})
        if (std::find(header.begin(), header.end(), need) == header.end())
          throw DataError("nrg csv: missing column '" + std::string(need) + "'");
      continue;
    }
    if (cells.size() != header.size())
      throw DataError("nrg csv: line " + std::to_string(lineno) + " has " +
                      std::to_string(cells.size()) + " cells, header has " +
                      std::to_string(header.size()));
    NrgInputRow row;
    for (std::size_t c = 0; c < header.size(); ++c) {
      const std::string& h = header[c];
      if (h == "system") {
        row.system = cells[c];
        continue;
      }
      double* field = h == "comp"    ? &row.comp
                      : h == "suff"  ? &row.suff
                      : h == "tf1"   ? &row.tf1
                      : h == "auprc" ? &row.auprc
                      : h == "task"  ? &row.task
                                     : nullptr;
      if (field == nullptr) continue;
      try {
        std::size_t used = 0;
        *field = std::stod(cells[c], &used);
        if (used != cells[c].size()) throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        throw DataError("nrg csv: line " + std::to_string(lineno) + ": bad number '" + cells[c] +
                        "' in column " + h);
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string NrgToCsv(std::span<const NrgInputRow> rows, std::span<const NrgScores> scores) {
  if (rows.size() != scores.size()) throw ContractViolation("nrg csv: row/score count mismatch");
  std::string out = "system,comp,suff,tf1,auprc,task,fnrg,pnrg,tnrg,cnrg\n";
  char buf[256];
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const NrgInputRow& r = rows[i];
    const NrgScores& s = scores[i];
    std::snprintf(buf, sizeof(buf), ",%.6g,%.6g,%.6g,%.6g,%.6g,%.6f,%.6f,%.6f,%.6f\n", r.comp,
                  r.suff, r.tf1, r.auprc, r.task, s.fnrg, s.pnrg, s.tnrg, s.cnrg);
    out += r.system;
    out += buf;
  }
  return out;
}

}  // namespace ratex
