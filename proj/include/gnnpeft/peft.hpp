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

#include "gnnpeft/config.hpp"
#include "gnnpeft/registry.hpp"
#include "gnnpeft/tensor.hpp"

namespace gnnpeft {

namespace names {
std::string adapter(int l, int which);  // "layer.<l>.adapter<1|2>"
std::string adapter_scale(int l, int which);  // "layer.<l>.scale<1|2>"
std::string adapter_seq(int l);         // "layer.<l>.adapter_seq"
std::string adapter_par(int l);         // "layer.<l>.adapter_par"
std::string node_prompt(int l);         // "layer.<l>.prompt"
inline constexpr const char* kFeaturePrompt = "prompt.feat";
}  // namespace names

// Bottleneck adapter: Linear(d -> b), ReLU, Linear(b -> d), BN(d). Holds
// handles into a registry.
struct AdapterModule {
  Tensor down_weight, down_bias;
  Tensor up_weight, up_bias;
  Tensor bn_gamma, bn_beta;
  BatchNormStats bn_stats;

  static AdapterModule from_registry(const ParamRegistry& registry,
                                     const std::string& prefix);
  int bottleneck() const { return static_cast<int>(down_weight.cols()); }
};

// A(x) = BN(W_up(ReLU(W_down(x)))).
Tensor adapter_forward(const Tensor& x, AdapterModule& module, Mode mode);

// Inserts the tuning modules of `config.mode` and sets every trainable flag.
// The registry must come from init_params or a backbone checkpoint. The
// classifier is trainable in every mode.
void apply_peft(ParamRegistry& registry, const ModelConfig& model,
                const PeftConfig& config, std::uint64_t seed);

// Folds every low-rank branch into its linear weight (W += A * B) and
// removes the branch parameters. Throws ModeError outside lora mode.
void lora_merge(ParamRegistry& registry, const PeftConfig& config);

// Registry entries kept by a tuning-run checkpoint: classifier, tuning
// modules and trainable backbone biases. In full mode everything.
bool is_tuned_entry(const std::string& name, const ParamEntry& entry,
                    PeftMode mode);

}  // namespace gnnpeft
