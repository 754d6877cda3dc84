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

#include "ratex/model.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "ratex/error.hpp"
#include "ratex/io.hpp"
#include "ratex/rng.hpp"

namespace ratex {
namespace {

using nlohmann::json;

constexpr std::string_view kCheckpointFormat = "ratex-checkpoint";
constexpr int kCheckpointVersion = 1;

Tensor UniformInit(Shape shape, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor t(shape);
  for (double& v : t.values) v = rng.Uniform(-limit, limit);
  return t;
}

EncoderParams InitEncoder(const ModelConfig& c, Rng& rng) {
  EncoderParams e;
  e.embedding = UniformInit({c.vocab_size, c.embed_dim}, c.vocab_size, c.embed_dim, rng);
  e.weight = UniformInit({c.embed_dim, c.hidden_dim}, c.embed_dim, c.hidden_dim, rng);
  e.bias = Tensor(Shape{1, c.hidden_dim});
  if (c.encoder == EncoderKind::kSingleHeadAttention)
    e.query = UniformInit({1, c.hidden_dim}, c.hidden_dim, 1, rng);
  return e;
}

void AppendEncoder(EncoderParams& e, std::vector<Tensor*>& out) {
  out.push_back(&e.embedding);
  out.push_back(&e.weight);
  out.push_back(&e.bias);
  if (e.query.size() > 0) out.push_back(&e.query);
}

void AppendEncoderNames(const EncoderParams& e, const std::string& prefix,
                        std::vector<std::string>& out) {
  out.push_back(prefix + ".embedding");
  out.push_back(prefix + ".weight");
  out.push_back(prefix + ".bias");
  if (e.query.size() > 0) out.push_back(prefix + ".query");
}

NodeId Hidden(Tape& tape, const BoundEncoder& e, std::span<const int> tokens) {
  const NodeId emb = tape.Embedding(e.embedding, tokens);
  return tape.Relu(tape.Add(tape.MatMul(emb, e.weight), e.bias));
}

void CheckTokens(const ModelConfig& c, std::span<const int> tokens) {
  if (tokens.empty()) throw DegenerateInput("model: empty token sequence");
  if (tokens.size() > c.max_len)
    throw ContractViolation("model: sequence of " + std::to_string(tokens.size()) +
                            " exceeds max_len " + std::to_string(c.max_len));
}

json ConfigToJson(const ModelConfig& c) {
  return json{{"vocab_size", c.vocab_size},   {"embed_dim", c.embed_dim},
              {"hidden_dim", c.hidden_dim},   {"num_classes", c.num_classes},
              {"encoder", ToString(c.encoder)}, {"variant", ToString(c.variant)},
              {"max_len", c.max_len}};
}

ModelConfig ConfigFromJson(const json& j) {
  ModelConfig c;
  c.vocab_size = j.at("vocab_size").get<std::size_t>();
  c.embed_dim = j.at("embed_dim").get<std::size_t>();
  c.hidden_dim = j.at("hidden_dim").get<std::size_t>();
  c.num_classes = j.at("num_classes").get<std::size_t>();
  c.encoder = ParseEncoderKind(j.at("encoder").get<std::string>());
  c.variant = ParseVariant(j.at("variant").get<std::string>());
  c.max_len = j.at("max_len").get<std::size_t>();
  c.Validate();
  return c;
}

}  // namespace

std::string_view ToString(EncoderKind k) {
  return k == EncoderKind::kMeanPoolMlp ? "mean-pool-mlp" : "single-head-attention";
}

std::string_view ToString(Variant v) { return v == Variant::kShared ? "shared" : "dual"; }

EncoderKind ParseEncoderKind(std::string_view s) {
  if (s == "mean-pool-mlp") return EncoderKind::kMeanPoolMlp;
  if (s == "single-head-attention") return EncoderKind::kSingleHeadAttention;
  throw ConfigError("unknown encoder kind '" + std::string(s) + "'");
}

Variant ParseVariant(std::string_view s) {
  if (s == "shared") return Variant::kShared;
  if (s == "dual") return Variant::kDual;
  throw ConfigError("unknown model variant '" + std::string(s) + "'");
}

void ModelConfig::Validate() const {
  if (num_classes < 2) throw ConfigError("model: num_classes must be >= 2");
  if (embed_dim < 1 || hidden_dim < 1) throw ConfigError("model: dims must be >= 1");
  if (vocab_size <= static_cast<std::size_t>(kFirstTokenId))
    throw ConfigError("model: vocab_size must leave room beyond PAD and MASK");
  if (max_len < 1) throw ConfigError("model: max_len must be >= 1");
}

std::vector<Tensor*> ModelParams::Parameters() {
  std::vector<Tensor*> out;
  AppendEncoder(task_encoder, out);
  if (extractor_encoder) AppendEncoder(*extractor_encoder, out);
  out.push_back(&task_head_weight);
  out.push_back(&task_head_bias);
  out.push_back(&extractor_head_weight);
  out.push_back(&extractor_head_bias);
  return out;
}

std::vector<const Tensor*> ModelParams::Parameters() const {
  auto mut = const_cast<ModelParams*>(this)->Parameters();
  return {mut.begin(), mut.end()};
}

std::vector<std::string> ModelParams::ParameterNames() const {
  std::vector<std::string> out;
  AppendEncoderNames(task_encoder, "task_encoder", out);
  if (extractor_encoder) AppendEncoderNames(*extractor_encoder, "extractor_encoder", out);
  out.insert(out.end(), {"task_head.weight", "task_head.bias", "extractor_head.weight",
                         "extractor_head.bias"});
  return out;
}

std::vector<std::size_t> ModelParams::ExtractorOnlyParameters() const {
  const auto names = ParameterNames();
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i].rfind("extractor_", 0) == 0) out.push_back(i);
  return out;
}

std::size_t ModelParams::ScalarCount() const {
  std::size_t n = 0;
  for (const Tensor* t : Parameters()) n += t->size();
  return n;
}

ModelParams BuildModel(const ModelConfig& config, std::uint64_t seed) {
  config.Validate();
  Rng rng = Rng::Stream(seed, "model-init");
  ModelParams p;
  p.config = config;
  p.task_encoder = InitEncoder(config, rng);
  if (config.variant == Variant::kDual) p.extractor_encoder = InitEncoder(config, rng);
  p.task_head_weight = UniformInit({config.hidden_dim, config.num_classes}, config.hidden_dim,
                                   config.num_classes, rng);
  p.task_head_bias = Tensor(Shape{1, config.num_classes});
  p.extractor_head_weight = UniformInit({config.hidden_dim, 1}, config.hidden_dim, 1, rng);
  p.extractor_head_bias = Tensor(Shape{1, 1});
  return p;
}

BoundModel Bind(Tape& tape, const ModelParams& params,
                std::optional<std::pair<std::size_t, NodeId>> override_leaf) {
  BoundModel b;
  const auto tensors = params.Parameters();
  for (std::size_t p = 0; p < tensors.size(); ++p) {
    if (override_leaf && override_leaf->first == p) {
      if (tape.shape(override_leaf->second) != tensors[p]->shape)
        throw ContractViolation("bind: override shape does not match parameter");
      b.leaves.push_back(override_leaf->second);
    } else {
      b.leaves.push_back(tape.Leaf(*tensors[p]));
    }
  }
  if (override_leaf && override_leaf->first >= tensors.size())
    throw ContractViolation("bind: override index out of range");
  std::size_t i = 0;
  auto bind_encoder = [&](const EncoderParams& e) {
    BoundEncoder be{b.leaves[i], b.leaves[i + 1], b.leaves[i + 2], std::nullopt};
    i += 3;
    if (e.query.size() > 0) be.query = b.leaves[i++];
    return be;
  };
  b.task = bind_encoder(params.task_encoder);
  b.extractor = params.extractor_encoder ? bind_encoder(*params.extractor_encoder) : b.task;
  b.task_head_weight = b.leaves[i++];
  b.task_head_bias = b.leaves[i++];
  b.extractor_head_weight = b.leaves[i++];
  b.extractor_head_bias = b.leaves[i++];
  return b;
}

NodeId TaskHidden(Tape& tape, const ModelParams& params, const BoundModel& bound,
                  std::span<const int> tokens) {
  CheckTokens(params.config, tokens);
  return Hidden(tape, bound.task, tokens);
}

NodeId TaskLogitsFromHidden(Tape& tape, const ModelParams& params, const BoundModel& bound,
                            NodeId hidden, NodeId attend_mask) {
  NodeId pooled;
  if (params.config.encoder == EncoderKind::kMeanPoolMlp) {
    pooled = tape.MeanPoolMasked(hidden, attend_mask);
  } else {
    const NodeId scores = tape.MatMul(*bound.task.query, hidden, /*transpose_rhs=*/true);
    const NodeId attn = tape.RowSoftmax(scores, attend_mask);
    pooled = tape.MatMul(attn, hidden);
  }
  return tape.Add(tape.MatMul(pooled, bound.task_head_weight), bound.task_head_bias);
}

NodeId TaskLogits(Tape& tape, const ModelParams& params, const BoundModel& bound,
                  std::span<const int> tokens, NodeId attend_mask) {
  return TaskLogitsFromHidden(tape, params, bound, TaskHidden(tape, params, bound, tokens),
                              attend_mask);
}

NodeId ExtractorScores(Tape& tape, const ModelParams& params, const BoundModel& bound,
                       std::span<const int> tokens) {
  CheckTokens(params.config, tokens);
  const NodeId hidden = Hidden(tape, bound.extractor, tokens);
  return tape.Add(tape.MatMul(hidden, bound.extractor_head_weight), bound.extractor_head_bias);
}

std::vector<double> TaskForward(const ModelParams& params, std::span<const int> tokens,
                                std::span<const double> attend_mask) {
  if (attend_mask.size() != tokens.size())
    throw ContractViolation("task_forward: mask length differs from token count");
  if (std::none_of(attend_mask.begin(), attend_mask.end(), [](double m) { return m != 0.0; }))
    throw DegenerateInput("task_forward: attend mask selects no position");
  Tape tape;
  const BoundModel b = Bind(tape, params);
  const NodeId mask =
      tape.Constant(Tensor::Column({attend_mask.begin(), attend_mask.end()}));
  return tape.value(TaskLogits(tape, params, b, tokens, mask)).values;
}

std::vector<double> ExtractorForward(const ModelParams& params, std::span<const int> tokens) {
  Tape tape;
  const BoundModel b = Bind(tape, params);
  return tape.value(ExtractorScores(tape, params, b, tokens)).values;
}

int Argmax(std::span<const double> values) {
  if (values.empty()) throw ContractViolation("argmax: empty input");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return static_cast<int>(best);
}

std::vector<double> Softmax(std::span<const double> logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) total += out[i] = std::exp(logits[i] - mx);
  for (double& v : out) v /= total;
  return out;
}

std::string CheckpointToString(const ModelParams& params) {
  json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  j["config"] = ConfigToJson(params.config);
  const auto names = params.ParameterNames();
  const auto tensors = params.Parameters();
  json ps = json::object();
  for (std::size_t i = 0; i < names.size(); ++i) {
    ps[names[i]] = json{{"shape", {tensors[i]->shape.rows, tensors[i]->shape.cols}},
                        {"values", tensors[i]->values}};
  }
  j["params"] = std::move(ps);
  return j.dump();
}

ModelParams CheckpointFromString(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  }
  if (j.value("format", "") != kCheckpointFormat) throw DataError("checkpoint: wrong format tag");
  if (j.value("version", 0) != kCheckpointVersion)
    throw DataError("checkpoint: unsupported version " + j.value("version", json()).dump());
  ModelParams p = BuildModel(ConfigFromJson(j.at("config")), 0);
  const auto names = p.ParameterNames();
  auto tensors = p.Parameters();
  const json& ps = j.at("params");
  if (ps.size() != names.size()) throw DataError("checkpoint: parameter count mismatch");
  for (std::size_t i = 0; i < names.size(); ++i) {
    const json& t = ps.at(names[i]);
    const Shape shape{t.at("shape").at(0).get<std::size_t>(), t.at("shape").at(1).get<std::size_t>()};
    if (!(shape == tensors[i]->shape)) throw DataError("checkpoint: shape mismatch for " + names[i]);
    *tensors[i] = Tensor(shape, t.at("values").get<std::vector<double>>());
  }
  return p;
}

void SaveCheckpoint(const ModelParams& params, const std::filesystem::path& path) {
  WriteTextFile(path, CheckpointToString(params));
}

ModelParams LoadCheckpoint(const std::filesystem::path& path) {
  return CheckpointFromString(ReadTextFile(path));
}

}  // namespace ratex
