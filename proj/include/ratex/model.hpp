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

#ifndef RATEX_MODEL_HPP_
#define RATEX_MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ratex/autodiff.hpp"

namespace ratex {

/// Reserved token ids. Real tokens start at kFirstTokenId.
inline constexpr int kPadId = 0;
inline constexpr int kMaskId = 1;
inline constexpr int kFirstTokenId = 2;

enum class EncoderKind { kMeanPoolMlp, kSingleHeadAttention };
enum class Variant { kShared, kDual };

std::string_view ToString(EncoderKind k);
std::string_view ToString(Variant v);
EncoderKind ParseEncoderKind(std::string_view s);
Variant ParseVariant(std::string_view s);

struct ModelConfig {
  std::size_t vocab_size = 200;  // includes PAD and MASK
  std::size_t embed_dim = 32;
  std::size_t hidden_dim = 64;
  std::size_t num_classes = 2;
  EncoderKind encoder = EncoderKind::kMeanPoolMlp;
  Variant variant = Variant::kDual;
  std::size_t max_len = 512;

  void Validate() const;
  bool operator==(const ModelConfig&) const = default;
};

/// Token encoder: embedding, one relu layer per position, and (attention
/// kind only) a learned pooling query.
struct EncoderParams {
  Tensor embedding;  // vocab x embed
  Tensor weight;     // embed x hidden
  Tensor bias;       // 1 x hidden
  Tensor query;      // 1 x hidden, empty for mean-pool

  bool operator==(const EncoderParams&) const = default;
};

/// Classifier and rationale extractor. In the shared variant the extractor
/// reads the task encoder; in the dual variant it owns a second encoder.
struct ModelParams {
  ModelConfig config;
  EncoderParams task_encoder;
  std::optional<EncoderParams> extractor_encoder;
  Tensor task_head_weight;       // hidden x M
  Tensor task_head_bias;         // 1 x M
  Tensor extractor_head_weight;  // hidden x 1
  Tensor extractor_head_bias;    // 1 x 1

  const EncoderParams& ExtractorEncoder() const {
    return extractor_encoder ? *extractor_encoder : task_encoder;
  }

  /// Every trainable tensor in a fixed order; names() matches it.
  std::vector<Tensor*> Parameters();
  std::vector<const Tensor*> Parameters() const;
  std::vector<std::string> ParameterNames() const;
  /// Indices into Parameters() owned only by the extractor side.
  std::vector<std::size_t> ExtractorOnlyParameters() const;
  std::size_t ScalarCount() const;

  bool operator==(const ModelParams&) const = default;
};

/// Deterministic init: weights uniform in ±sqrt(6/(fan_in+fan_out)), biases 0.
ModelParams BuildModel(const ModelConfig& config, std::uint64_t seed);

struct BoundEncoder {
  NodeId embedding, weight, bias;
  std::optional<NodeId> query;
};

/// Parameter leaves placed on one tape; leaves follow Parameters() order.
struct BoundModel {
  BoundEncoder task;
  BoundEncoder extractor;
  NodeId task_head_weight, task_head_bias;
  NodeId extractor_head_weight, extractor_head_bias;
  std::vector<NodeId> leaves;
};

/// Places every parameter on the tape as a leaf. `override_leaf` swaps the
/// leaf of parameter index `first` for an existing node of equal shape,
/// which lets a gradient check drive one parameter from its own input.
BoundModel Bind(Tape& tape, const ModelParams& params,
                std::optional<std::pair<std::size_t, NodeId>> override_leaf = std::nullopt);

/// Per-position hidden states of the task encoder, n x hidden.
NodeId TaskHidden(Tape& tape, const ModelParams& params, const BoundModel& bound,
                  std::span<const int> tokens);

/// Pools hidden states under an attend mask (length n) and applies the task
/// head; returns 1 x M logits. Positions with mask 0 never influence the
/// result, so hidden states of the unmasked sequence can be reused for
/// MASK-substituted copies of it.
NodeId TaskLogitsFromHidden(Tape& tape, const ModelParams& params, const BoundModel& bound,
                            NodeId hidden, NodeId attend_mask);

NodeId TaskLogits(Tape& tape, const ModelParams& params, const BoundModel& bound,
                  std::span<const int> tokens, NodeId attend_mask);

/// Per-token rationale score logits, n x 1.
NodeId ExtractorScores(Tape& tape, const ModelParams& params, const BoundModel& bound,
                       std::span<const int> tokens);

// Tape-free forwards for evaluation.
std::vector<double> TaskForward(const ModelParams& params, std::span<const int> tokens,
                                std::span<const double> attend_mask);
std::vector<double> ExtractorForward(const ModelParams& params, std::span<const int> tokens);

/// Index of the largest entry; lowest index wins ties.
int Argmax(std::span<const double> values);
std::vector<double> Softmax(std::span<const double> logits);

// Checkpoints: versioned JSON holding config and every parameter array.
// Doubles are written in shortest round-trip form, so load(save(p)) == p
// bit for bit.
std::string CheckpointToString(const ModelParams& params);
ModelParams CheckpointFromString(std::string_view text);
void SaveCheckpoint(const ModelParams& params, const std::filesystem::path& path);
ModelParams LoadCheckpoint(const std::filesystem::path& path);

}  // namespace ratex

#endif  // RATEX_MODEL_HPP_
