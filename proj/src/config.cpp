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

#include "gnnpeft/config.hpp"

#include <algorithm>

#include "gnnpeft/errors.hpp"

namespace gnnpeft {
namespace {

struct ModeName {
  PeftMode mode;
  std::string_view name;
};

constexpr ModeName kModeNames[] = {
    {PeftMode::kFull, "full"},
    {PeftMode::kAdapterGnn, "adaptergnn"},
    {PeftMode::kAdapterSeq, "adapter_seq"},
    {PeftMode::kAdapterPar, "adapter_par"},
    {PeftMode::kLora, "lora"},
    {PeftMode::kBitFit, "bitfit"},
    {PeftMode::kIa3, "ia3"},
    {PeftMode::kPromptFeat, "prompt_feat"},
    {PeftMode::kPromptNode, "prompt_node"},
    {PeftMode::kPartial, "partial_k"},
};

}  // namespace

void ModelConfig::validate() const {
  if (emb_dim < 1) throw ConfigError("emb must be >= 1");
  if (num_layers < 1) throw ConfigError("layers must be >= 1");
  if (mlp_hidden < 1) throw ConfigError("mlp_hidden must be >= 1");
  if (num_tasks < 1) throw ConfigError("tasks must be >= 1");
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("dropout must lie in [0, 1)");
  for (const int v : {vocab.node[0], vocab.node[1], vocab.edge[0], vocab.edge[1]}) {
    if (v < 1) throw ConfigError("vocabulary sizes must be >= 1");
  }
}

std::string_view to_string(PeftMode mode) {
  for (const auto& m : kModeNames)
    if (m.mode == mode) return m.name;
  return "unknown";
}

PeftMode parse_peft_mode(std::string_view name) {
  for (const auto& m : kModeNames)
    if (m.name == name) return m.mode;
  if (name == "partial") return PeftMode::kPartial;
  throw ConfigError("unknown tuning mode '" + std::string(name) + "'");
}

void PeftConfig::validate(const ModelConfig& model) const {
  switch (mode) {
    case PeftMode::kAdapterGnn:
    case PeftMode::kAdapterSeq:
    case PeftMode::kAdapterPar:
      if (bottleneck < 0 || bottleneck >= model.emb_dim) {
        throw ConfigError("bottleneck must satisfy 0 <= b < emb (got b=" +
                          std::to_string(bottleneck) + ", emb=" +
                          std::to_string(model.emb_dim) + ")");
      }
      break;
    case PeftMode::kLora:
      if (lora_rank < 1) throw ConfigError("lora_rank must be >= 1");
      break;
    case PeftMode::kPartial:
      if (partial_k < 1 || partial_k > model.num_layers) {
        throw ConfigError("partial_k must lie in [1, layers]");
      }
      break;
    default:
      break;
  }
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(lr >= 0.0)) throw ConfigError("lr must be non-negative");
  if (weight_decay < 0.0) throw ConfigError("weight_decay must be non-negative");
}

}  // namespace gnnpeft
