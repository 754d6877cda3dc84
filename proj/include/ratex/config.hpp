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

#ifndef RATEX_CONFIG_HPP_
#define RATEX_CONFIG_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ratex/data.hpp"
#include "ratex/training.hpp"

namespace ratex {

struct DataConfig {
  /// Synthetic corpus; vocab size, class count and seed are taken from the
  /// model section and the top-level seed.
  SyntheticSpec synth;
  std::size_t train_examples = 2000;
  std::size_t dev_examples = 500;
  /// JSONL files used instead of the synthetic corpus when set.
  std::string train_path;
  std::string dev_path;
};

/// Everything a command needs, read from one INI file plus overrides.
///
///   seed = 0
///   [model]   vocab_size embed_dim hidden_dim num_classes encoder variant max_len
///   [loss]    alpha_c alpha_s alpha_f alpha_p margin_s margin_c k_set plaus_one_sided
///   [imle]    lambda noise_scale samples aimle target_rate step_factor ema_decay
///             dead_band initial_rate min_lambda max_lambda
///   [optim]   lr beta1 beta2 eps
///   [train]   batch_size max_epochs patience checkpoint_dir
///   [eval]    aopc_bins plaus_k averaging task_metric
///   [data]    train_examples dev_examples seq_len_min seq_len_max span_len_min
///             span_len_max signal_pool_size scatter train_path dev_path
///   [sweep]   axis values train_k jobs
///
/// alpha_f sets alpha_c and alpha_s together. Lists are comma separated.
struct RunConfig {
  std::uint64_t seed = 0;
  TrainConfig train;
  DataConfig data;
  SweepConfig sweep;

  /// Training config with the top-level seed applied.
  TrainConfig Train() const;
  /// Synthetic spec consistent with the model section and seed.
  SyntheticSpec Synthetic() const;
  void Validate() const;
};

/// Applies INI text on top of `cfg`. Errors carry "<source>:<line>: ...".
void ApplyIni(RunConfig& cfg, std::string_view text, std::string_view source = "config");

/// Applies one "section.key=value" (or "seed=value") override.
void ApplyOverride(RunConfig& cfg, std::string_view assignment);

/// Defaults, then the optional file, then overrides in order.
RunConfig LoadRunConfig(const std::optional<std::filesystem::path>& path,
                        std::span<const std::string> overrides);

/// Complete INI snapshot; ApplyIni on defaults reproduces `cfg` exactly.
std::string RunConfigToIni(const RunConfig& cfg);

struct LoadedData {
  Dataset train;
  Dataset dev;
  std::vector<std::string> diagnostics;  // skipped JSONL lines
};

/// The JSONL files named in [data], or the synthetic corpus split into its
/// first train_examples and the rest.
LoadedData LoadData(const RunConfig& cfg);

/// Every accepted "section.key" name.
std::vector<std::string> ConfigKeys();

}  // namespace ratex

#endif  // RATEX_CONFIG_HPP_
