// Copyright 2026 The gnnpeft Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "gnnpeft/graph.hpp"

namespace gnnpeft {

struct ModelConfig {
  int emb_dim = 300;
  int num_layers = 5;
  int mlp_hidden = 600;
  int num_tasks = 1;
  double dropout = 0.5;
  VocabSizes vocab;

  void validate() const;
};

enum class PeftMode {
  kFull,
  kAdapterGnn,
  kAdapterSeq,
  kAdapterPar,
  kLora,
  kBitFit,
  kIa3,
  kPromptFeat,
  kPromptNode,
  kPartial,
};

inline constexpr PeftMode kAllPeftModes[] = {
    PeftMode::kFull,  PeftMode::kAdapterGnn, PeftMode::kAdapterSeq,
    PeftMode::kAdapterPar, PeftMode::kLora, PeftMode::kBitFit,
    PeftMode::kIa3,   PeftMode::kPromptFeat, PeftMode::kPromptNode,
    PeftMode::kPartial};

// Names used on the command line and in config files: full, adaptergnn,
// adapter_seq, adapter_par, lora, bitfit, ia3, prompt_feat, prompt_node,
// partial_k.
std::string_view to_string(PeftMode mode);
// Throws ConfigError for unknown names.
PeftMode parse_peft_mode(std::string_view name);

struct PeftConfig {
  PeftMode mode = PeftMode::kFull;
  int bottleneck = 15;
  int lora_rank = 4;
  double scaling_init = 0.01;
  bool tune_backbone_bias = true;
  // Backbone BN affine parameters stay frozen in adapter modes unless set.
  bool tune_backbone_bn = false;
  int partial_k = 1;

  // Bottleneck 0 is accepted for adapter modes and means the adapters are
  // omitted (identity mapping).
  void validate(const ModelConfig& model) const;
};

struct TrainConfig {
  int epochs = 100;
  int batch_size = 32;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double weight_decay = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

}  // namespace gnnpeft
