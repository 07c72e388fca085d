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
#include "gnnpeft/graph.hpp"
#include "gnnpeft/registry.hpp"
#include "gnnpeft/tensor.hpp"

namespace gnnpeft {

// Parameter names used by the backbone.
namespace names {
std::string layer(int l);                  // "layer.<l>"
std::string mlp_linear(int l, int index);  // "layer.<l>.mlp.<0|2>"
std::string layer_bn(int l);               // "layer.<l>.bn"
inline constexpr const char* kClassifier = "classifier";
}  // namespace names

// Backbone + classifier with the default initialization: linear weights
// uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases 0, embedding tables
// normal(0, 0.02), BN gamma 1 / beta 0 with running stats (0, 1). Each
// tensor draws from a stream named after the tensor, so values do not
// depend on creation order.
ParamRegistry init_params(const ModelConfig& config, std::uint64_t seed);

// Replaces (or creates) the classifier with a freshly initialized, trainable
// Linear(d -> T).
void reset_classifier(ParamRegistry& registry, const ModelConfig& config,
                      std::uint64_t seed);

// Registers a fresh Linear(n_in -> n_out) under `prefix`.
void add_linear(ParamRegistry& registry, const std::string& prefix, int n_in,
                int n_out, ParamGroup group, bool trainable, const Rng& rng);
// Registers BN(d) affine parameters and running-stat buffers under `prefix`.
void add_batchnorm(ParamRegistry& registry, const std::string& prefix, int d,
                   ParamGroup group, bool trainable);

// x * W + b, honoring an (IA)^3 input reweighting vector "<prefix>.ia3" and a
// low-rank branch "<prefix>.lora_a" / "<prefix>.lora_b" when registered.
Tensor linear(const ParamRegistry& registry, const std::string& prefix,
              const Tensor& x);
Tensor batchnorm(const ParamRegistry& registry, const std::string& prefix,
                 const Tensor& x, Mode mode);

// Sum of node- and edge-attribute embeddings.
Tensor encode_nodes(const ParamRegistry& registry, const GraphBatch& batch);
Tensor encode_edges(const ParamRegistry& registry, const GraphBatch& batch);

// MP(x)_i = sum over directed edges j -> i (self-loop included) of
// x_j + e_ji. Non-parametric.
Tensor message_pass(const Tensor& x, const GraphBatch& batch,
                    const Tensor& edge_emb);

// One GIN layer h_l = BN(MLP(MP(x_l))) plus whatever tuning modules the
// registry holds for layer `l`.
Tensor layer_forward(const ParamRegistry& registry, int l, const Tensor& x,
                     const GraphBatch& batch, const Tensor& edge_emb,
                     Mode mode);

// Final-layer node embeddings h_L (N x d). x_{l+1} = Dropout(ReLU(h_l))
// between layers; `dropout_rng` is required in train mode when p > 0.
Tensor node_forward(const ParamRegistry& registry, const ModelConfig& config,
                    const GraphBatch& batch, Mode mode, Rng* dropout_rng);

// Mean-pooled graph embeddings (G x d).
Tensor gin_forward(const ParamRegistry& registry, const ModelConfig& config,
                   const GraphBatch& batch, Mode mode, Rng* dropout_rng);

// Logits (G x T).
Tensor classify(const ParamRegistry& registry, const Tensor& embeddings);

}  // namespace gnnpeft
