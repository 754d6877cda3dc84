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

#include "ratex/config.hpp"

#include <charconv>
#include <functional>
#include <stdexcept>

#include "ratex/error.hpp"
#include "ratex/io.hpp"

namespace ratex {
namespace {

std::string_view Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double ParseDouble(std::string_view v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty())
    throw std::invalid_argument("expected a number, got '" + std::string(v) + "'");
  return out;
}

std::uint64_t ParseU64(std::string_view v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty())
    throw std::invalid_argument("expected a non-negative integer, got '" + std::string(v) + "'");
  return out;
}

bool ParseBool(std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument("expected true or false, got '" + std::string(v) + "'");
}

std::vector<double> ParseList(std::string_view v) {
  std::vector<double> out;
  if (Trim(v).empty()) return out;
  std::size_t start = 0;
  while (start <= v.size()) {
    const std::size_t comma = v.find(',', start);
    const std::size_t end = comma == std::string_view::npos ? v.size() : comma;
    out.push_back(ParseDouble(Trim(v.substr(start, end - start))));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string FormatDouble(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string FormatList(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ", ";
    out += FormatDouble(v[i]);
  }
  return out;
}

struct KeySpec {
  std::string section;
  std::string key;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;  // empty for aliases
};

template <typename Ref>
KeySpec Real(std::string s, std::string k, Ref ref) {
  return {std::move(s), std::move(k),
          [ref](RunConfig& c, std::string_view v) { ref(c) = ParseDouble(v); },
          [ref](const RunConfig& c) { return FormatDouble(ref(const_cast<RunConfig&>(c))); }};
}

template <typename Ref>
KeySpec Count(std::string s, std::string k, Ref ref) {
  return {std::move(s), std::move(k),
          [ref](RunConfig& c, std::string_view v) { ref(c) = static_cast<std::size_t>(ParseU64(v)); },
          [ref](const RunConfig& c) { return std::to_string(ref(const_cast<RunConfig&>(c))); }};
}

template <typename Ref>
KeySpec Flag(std::string s, std::string k, Ref ref) {
  return {std::move(s), std::move(k),
          [ref](RunConfig& c, std::string_view v) { ref(c) = ParseBool(v); },
          [ref](const RunConfig& c) {
            return std::string(ref(const_cast<RunConfig&>(c)) ? "true" : "false");
          }};
}

template <typename Ref>
KeySpec Text(std::string s, std::string k, Ref ref) {
  return {std::move(s), std::move(k),
          [ref](RunConfig& c, std::string_view v) { ref(c) = std::string(v); },
          [ref](const RunConfig& c) { return ref(const_cast<RunConfig&>(c)); }};
}

template <typename Ref>
KeySpec List(std::string s, std::string k, Ref ref) {
  return {std::move(s), std::move(k),
          [ref](RunConfig& c, std::string_view v) { ref(c) = ParseList(v); },
          [ref](const RunConfig& c) { return FormatList(ref(const_cast<RunConfig&>(c))); }};
}

// Enum-valued keys: parse via a ratex Parse* function, print via ToString.
template <typename Ref, typename ParseFn>
KeySpec Choice(std::string s, std::string k, Ref ref, ParseFn parse) {
  return {std::move(s), std::move(k),
          [ref, parse](RunConfig& c, std::string_view v) {
            try {
              ref(c) = parse(v);
            } catch (const std::exception& e) {
              throw std::invalid_argument(e.what());
            }
          },
          [ref](const RunConfig& c) { return std::string(ToString(ref(const_cast<RunConfig&>(c)))); }};
}

const std::vector<KeySpec>& Keys() {
  static const std::vector<KeySpec> keys = [] {
    std::vector<KeySpec> k;
    k.push_back({"", "seed", [](RunConfig& c, std::string_view v) { c.seed = ParseU64(v); },
                 [](const RunConfig& c) { return std::to_string(c.seed); }});

    k.push_back(Count("model", "vocab_size", [](RunConfig& c) -> auto& { return c.train.model.vocab_size; }));
    k.push_back(Count("model", "embed_dim", [](RunConfig& c) -> auto& { return c.train.model.embed_dim; }));
    k.push_back(Count("model", "hidden_dim", [](RunConfig& c) -> auto& { return c.train.model.hidden_dim; }));
    k.push_back(Count("model", "num_classes", [](RunConfig& c) -> auto& { return c.train.model.num_classes; }));
    k.push_back(Choice("model", "encoder", [](RunConfig& c) -> auto& { return c.train.model.encoder; },
                       ParseEncoderKind));
    k.push_back(Choice("model", "variant", [](RunConfig& c) -> auto& { return c.train.model.variant; },
                       ParseVariant));
    k.push_back(Count("model", "max_len", [](RunConfig& c) -> auto& { return c.train.model.max_len; }));

    k.push_back(Real("loss", "alpha_c", [](RunConfig& c) -> auto& { return c.train.weights.alpha_c; }));
    k.push_back(Real("loss", "alpha_s", [](RunConfig& c) -> auto& { return c.train.weights.alpha_s; }));
    k.push_back({"loss", "alpha_f",
                 [](RunConfig& c, std::string_view v) { c.train.weights.SetFaithfulness(ParseDouble(v)); },
                 {}});
    k.push_back(Real("loss", "alpha_p", [](RunConfig& c) -> auto& { return c.train.weights.alpha_p; }));
    k.push_back(Real("loss", "margin_s", [](RunConfig& c) -> auto& { return c.train.weights.margin_s; }));
    k.push_back(Real("loss", "margin_c", [](RunConfig& c) -> auto& { return c.train.weights.margin_c; }));
    k.push_back(List("loss", "k_set", [](RunConfig& c) -> auto& { return c.train.weights.k_set; }));
    k.push_back(Flag("loss", "plaus_one_sided",
                     [](RunConfig& c) -> auto& { return c.train.weights.plaus_one_sided; }));

    k.push_back(Real("imle", "lambda", [](RunConfig& c) -> auto& { return c.train.imle.lambda; }));
    k.push_back(Real("imle", "noise_scale", [](RunConfig& c) -> auto& { return c.train.imle.noise_scale; }));
    k.push_back(Count("imle", "samples", [](RunConfig& c) -> auto& { return c.train.imle.samples; }));
    k.push_back(Flag("imle", "aimle", [](RunConfig& c) -> auto& { return c.train.aimle_enabled; }));
    k.push_back(Real("imle", "target_rate", [](RunConfig& c) -> auto& { return c.train.aimle.target_rate; }));
    k.push_back(Real("imle", "step_factor", [](RunConfig& c) -> auto& { return c.train.aimle.step_factor; }));
    k.push_back(Real("imle", "ema_decay", [](RunConfig& c) -> auto& { return c.train.aimle.ema_decay; }));
    k.push_back(Real("imle", "dead_band", [](RunConfig& c) -> auto& { return c.train.aimle.dead_band; }));
    k.push_back(Real("imle", "initial_rate", [](RunConfig& c) -> auto& { return c.train.aimle.initial_rate; }));
    k.push_back(Real("imle", "min_lambda", [](RunConfig& c) -> auto& { return c.train.aimle.min_lambda; }));
    k.push_back(Real("imle", "max_lambda", [](RunConfig& c) -> auto& { return c.train.aimle.max_lambda; }));

    k.push_back(Real("optim", "lr", [](RunConfig& c) -> auto& { return c.train.optim.lr; }));
    k.push_back(Real("optim", "beta1", [](RunConfig& c) -> auto& { return c.train.optim.beta1; }));
    k.push_back(Real("optim", "beta2", [](RunConfig& c) -> auto& { return c.train.optim.beta2; }));
    k.push_back(Real("optim", "eps", [](RunConfig& c) -> auto& { return c.train.optim.eps; }));

    k.push_back(Count("train", "batch_size", [](RunConfig& c) -> auto& { return c.train.batch_size; }));
    k.push_back(Count("train", "max_epochs", [](RunConfig& c) -> auto& { return c.train.max_epochs; }));
    k.push_back(Count("train", "patience", [](RunConfig& c) -> auto& { return c.train.patience; }));
    k.push_back(Text("train", "checkpoint_dir", [](RunConfig& c) -> auto& { return c.train.checkpoint_dir; }));

    k.push_back(List("eval", "aopc_bins", [](RunConfig& c) -> auto& { return c.train.eval.aopc_bins; }));
    k.push_back({"eval", "plaus_k",
                 [](RunConfig& c, std::string_view v) {
                   c.train.eval.plaus_k = v == "auto" ? 0.0 : ParseDouble(v);
                 },
                 [](const RunConfig& c) {
                   return c.train.eval.plaus_k == 0.0 ? std::string("auto")
                                                      : FormatDouble(c.train.eval.plaus_k);
                 }});
    k.push_back(Choice("eval", "averaging", [](RunConfig& c) -> auto& { return c.train.eval.averaging; },
                       ParseAveraging));
    k.push_back(Choice("eval", "task_metric",
                       [](RunConfig& c) -> auto& { return c.train.eval.task_metric; }, ParseTaskMetric));

    k.push_back(Count("data", "train_examples", [](RunConfig& c) -> auto& { return c.data.train_examples; }));
    k.push_back(Count("data", "dev_examples", [](RunConfig& c) -> auto& { return c.data.dev_examples; }));
    k.push_back(Count("data", "seq_len_min", [](RunConfig& c) -> auto& { return c.data.synth.seq_len_min; }));
    k.push_back(Count("data", "seq_len_max", [](RunConfig& c) -> auto& { return c.data.synth.seq_len_max; }));
    k.push_back(Count("data", "span_len_min", [](RunConfig& c) -> auto& { return c.data.synth.span_len_min; }));
    k.push_back(Count("data", "span_len_max", [](RunConfig& c) -> auto& { return c.data.synth.span_len_max; }));
    k.push_back(Count("data", "signal_pool_size",
                      [](RunConfig& c) -> auto& { return c.data.synth.signal_pool_size; }));
    k.push_back(Flag("data", "scatter", [](RunConfig& c) -> auto& { return c.data.synth.scatter; }));
    k.push_back(Text("data", "train_path", [](RunConfig& c) -> auto& { return c.data.train_path; }));
    k.push_back(Text("data", "dev_path", [](RunConfig& c) -> auto& { return c.data.dev_path; }));

    k.push_back(Choice("sweep", "axis", [](RunConfig& c) -> auto& { return c.sweep.axis; }, ParseSweepAxis));
    k.push_back(List("sweep", "values", [](RunConfig& c) -> auto& { return c.sweep.values; }));
    k.push_back(Real("sweep", "train_k", [](RunConfig& c) -> auto& { return c.sweep.train_k; }));
    k.push_back(Count("sweep", "jobs", [](RunConfig& c) -> auto& { return c.sweep.jobs; }));
    return k;
  }();
  return keys;
}

const KeySpec* FindKey(std::string_view section, std::string_view key) {
  for (const KeySpec& k : Keys())
    if (k.section == section && k.key == key) return &k;
  return nullptr;
}

void Assign(RunConfig& cfg, std::string_view section, std::string_view key, std::string_view value,
            const std::string& where) {
  const KeySpec* spec = FindKey(section, key);
  if (spec == nullptr) {
    const std::string name = section.empty() ? std::string(key)
                                             : std::string(section) + "." + std::string(key);
    throw ConfigError(where + ": unknown key '" + name + "'");
  }
  try {
    spec->set(cfg, value);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + ": " + std::string(key) + ": " + e.what());
  }
}

}  // namespace

TrainConfig RunConfig::Train() const {
  TrainConfig t = train;
  t.seed = seed;
  return t;
}

SyntheticSpec RunConfig::Synthetic() const {
  SyntheticSpec s = data.synth;
  s.vocab_size = train.model.vocab_size;
  s.num_classes = train.model.num_classes;
  s.num_examples = data.train_examples + data.dev_examples;
  s.seed = seed;
  return s;
}

void RunConfig::Validate() const {
  Train().Validate();
  if (data.train_path.empty() != data.dev_path.empty())
    throw ConfigError("data.train_path and data.dev_path must be set together");
  if (data.train_path.empty()) {
    if (data.train_examples < 1 || data.dev_examples < 1)
      throw ConfigError("data.train_examples and data.dev_examples must be at least 1");
    try {
      Synthetic().Validate();
    } catch (const DataError& e) {
      throw ConfigError(e.what());
    } catch (const ContractViolation& e) {
      throw ConfigError(e.what());
    }
  }
  if (sweep.jobs < 1) throw ConfigError("sweep.jobs must be at least 1");
  if (!(sweep.train_k > 0.0 && sweep.train_k <= 100.0))
    throw ConfigError("sweep.train_k must lie in (0, 100]");
}

void ApplyIni(RunConfig& cfg, std::string_view text, std::string_view source) {
  std::string section;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++lineno;
    const std::string where = std::string(source) + ":" + std::to_string(lineno);

    for (std::size_t i = 0; i < line.size(); ++i) {
      if ((line[i] == '#' || line[i] == ';') && (i == 0 || line[i - 1] == ' ' || line[i - 1] == '\t')) {
        line = line.substr(0, i);
        break;
      }
    }
    line = Trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
      section = std::string(Trim(line.substr(1, line.size() - 2)));
      bool known = false;
      for (const KeySpec& k : Keys()) known = known || (!section.empty() && k.section == section);
      if (!known) throw ConfigError(where + ": unknown section [" + section + "]");
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + ": expected key = value");
    const std::string_view key = Trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(where + ": missing key before '='");
    Assign(cfg, section, key, Trim(line.substr(eq + 1)), where);
  }
}

void ApplyOverride(RunConfig& cfg, std::string_view assignment) {
  const std::string where = "override '" + std::string(assignment) + "'";
  const std::size_t eq = assignment.find('=');
  if (eq == std::string_view::npos) throw ConfigError(where + ": expected section.key=value");
  const std::string_view name = Trim(assignment.substr(0, eq));
  const std::size_t dot = name.find('.');
  const std::string_view section = dot == std::string_view::npos ? std::string_view() : name.substr(0, dot);
  const std::string_view key = dot == std::string_view::npos ? name : name.substr(dot + 1);
  Assign(cfg, section, key, Trim(assignment.substr(eq + 1)), where);
}

RunConfig LoadRunConfig(const std::optional<std::filesystem::path>& path,
                        std::span<const std::string> overrides) {
  RunConfig cfg;
  if (path) {
    std::string text;
    try {
      text = ReadTextFile(*path);
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
    ApplyIni(cfg, text, path->string());
  }
  for (const std::string& o : overrides) ApplyOverride(cfg, o);
  cfg.Validate();
  return cfg;
}

std::string RunConfigToIni(const RunConfig& cfg) {
  std::string out;
  std::string section = "\x01";
  for (const KeySpec& k : Keys()) {
    if (!k.get) continue;
    if (k.section != section) {
      section = k.section;
      if (!section.empty()) out += "\n[" + section + "]\n";
    }
    out += k.key + " = " + k.get(cfg) + "\n";
  }
  return out;
}

LoadedData LoadData(const RunConfig& cfg) {
  LoadedData out;
  const std::size_t classes = cfg.train.model.num_classes;
  if (!cfg.data.train_path.empty()) {
    LoadResult train = LoadJsonl(cfg.data.train_path, classes);
    LoadResult dev = LoadJsonl(cfg.data.dev_path, classes);
    for (std::string& d : train.diagnostics) out.diagnostics.push_back(cfg.data.train_path + ": " + d);
    for (std::string& d : dev.diagnostics) out.diagnostics.push_back(cfg.data.dev_path + ": " + d);
    out.train = std::move(train.data);
    out.dev = std::move(dev.data);
    if (out.train.empty() || out.dev.empty()) throw DataError("no usable examples in the data files");
    return out;
  }
  Dataset all = GenerateSynthetic(cfg.Synthetic());
  const auto cut = all.begin() + static_cast<std::ptrdiff_t>(cfg.data.train_examples);
  out.train.assign(all.begin(), cut);
  out.dev.assign(cut, all.end());
  return out;
}

std::vector<std::string> ConfigKeys() {
  std::vector<std::string> out;
  for (const KeySpec& k : Keys()) out.push_back(k.section.empty() ? k.key : k.section + "." + k.key);
  return out;
}

}  // namespace ratex
