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

#include "gnnpeft/gin.hpp"

#include <cmath>

#include "gnnpeft/errors.hpp"
#include "gnnpeft/peft.hpp"

namespace gnnpeft {

namespace names {
std::string layer(int l) { return "layer." + std::to_string(l); }
std::string mlp_linear(int l, int index) {
  return layer(l) + ".mlp." + std::to_string(index);
}
std::string layer_bn(int l) { return layer(l) + ".bn"; }
}  // namespace names

namespace {

Tensor uniform_tensor(Shape shape, double bound, Rng rng) {
  Tensor t = Tensor::zeros(std::move(shape));
  for (auto& v : t.data()) v = rng.uniform(-bound, bound);
  return t;
}

Tensor normal_tensor(Shape shape, double stddev, Rng rng) {
  Tensor t = Tensor::zeros(std::move(shape));
  for (auto& v : t.data()) v = rng.normal(0.0, stddev);
  return t;
}

}  // namespace

void add_linear(ParamRegistry& registry, const std::string& prefix, int n_in,
                int n_out, ParamGroup group, bool trainable, const Rng& rng) {
  const auto in = static_cast<std::size_t>(n_in), out = static_cast<std::size_t>(n_out);
  const double bound = 1.0 / std::sqrt(static_cast<double>(n_in));
  registry.add(prefix + ".weight",
               uniform_tensor({in, out}, bound, rng.split(prefix + ".weight")), group,
               trainable);
  registry.add(prefix + ".bias", Tensor::zeros({out}), group, trainable);
}

void add_batchnorm(ParamRegistry& registry, const std::string& prefix, int d,
                   ParamGroup group, bool trainable) {
  const auto n = static_cast<std::size_t>(d);
  registry.add(prefix + ".weight", Tensor::full({n}, 1.0), group, trainable);
  registry.add(prefix + ".bias", Tensor::zeros({n}), group, trainable);
  registry.add_buffer(prefix + ".running_mean", Tensor::zeros({n}));
  registry.add_buffer(prefix + ".running_var", Tensor::full({n}, 1.0));
}

ParamRegistry init_params(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  const Rng rng = Rng(seed).split("init");
  const auto d = static_cast<std::size_t>(config.emb_dim);
  ParamRegistry reg;
  for (int c = 0; c < 2; ++c) {
    const auto cs = static_cast<std::size_t>(c);
    const std::string node = "encoder.node." + std::to_string(c) + ".weight";
    reg.add(node,
            normal_tensor({static_cast<std::size_t>(config.vocab.node[cs]), d}, 0.02,
                          rng.split(node)),
            ParamGroup::kBackbone, true);
    const std::string edge = "encoder.edge." + std::to_string(c) + ".weight";
    reg.add(edge,
            normal_tensor({static_cast<std::size_t>(config.vocab.edge[cs] + 1), d}, 0.02,
                          rng.split(edge)),
            ParamGroup::kBackbone, true);
  }
  for (int l = 0; l < config.num_layers; ++l) {
    add_linear(reg, names::mlp_linear(l, 0), config.emb_dim, config.mlp_hidden,
               ParamGroup::kBackbone, true, rng);
    add_linear(reg, names::mlp_linear(l, 2), config.mlp_hidden, config.emb_dim,
               ParamGroup::kBackbone, true, rng);
    add_batchnorm(reg, names::layer_bn(l), config.emb_dim, ParamGroup::kBackbone, true);
  }
  add_linear(reg, names::kClassifier, config.emb_dim, config.num_tasks,
             ParamGroup::kClassifier, true, rng);
  return reg;
}

void reset_classifier(ParamRegistry& registry, const ModelConfig& config,
                      std::uint64_t seed) {
  for (const char* suffix : {".weight", ".bias"}) {
    const std::string name = std::string(names::kClassifier) + suffix;
    if (registry.contains(name)) registry.erase(name);
  }
  add_linear(registry, names::kClassifier, config.emb_dim, config.num_tasks,
             ParamGroup::kClassifier, true, Rng(seed).split("init"));
}

Tensor linear(const ParamRegistry& registry, const std::string& prefix,
              const Tensor& x) {
  const Tensor& w = registry.get(prefix + ".weight");
  if (x.dim() != 2 || x.cols() != w.rows()) {
    throw DimensionError(prefix + ": input " + shape_str(x.shape()) +
                         " does not match weight " + shape_str(w.shape()));
  }
  Tensor in = x;
  if (registry.contains(prefix + ".ia3")) in = ops::mul_cols(x, registry.get(prefix + ".ia3"));
  Tensor y = ops::matmul(in, w);
  if (registry.contains(prefix + ".lora_a")) {
    y = ops::add(y, ops::matmul(ops::matmul(x, registry.get(prefix + ".lora_a")),
                                registry.get(prefix + ".lora_b")));
  }
  return ops::add_bias(y, registry.get(prefix + ".bias"));
}

Tensor batchnorm(const ParamRegistry& registry, const std::string& prefix,
                 const Tensor& x, Mode mode) {
  BatchNormStats stats{registry.buffer(prefix + ".running_mean"),
                       registry.buffer(prefix + ".running_var")};
  return ops::batchnorm1d(x, registry.get(prefix + ".weight"),
                          registry.get(prefix + ".bias"), stats, mode);
}

Tensor encode_nodes(const ParamRegistry& registry, const GraphBatch& batch) {
  Tensor x = ops::add(ops::gather_rows(registry.get("encoder.node.0.weight"), batch.node_attr0),
                      ops::gather_rows(registry.get("encoder.node.1.weight"), batch.node_attr1));
  if (registry.contains(names::kFeaturePrompt)) {
    x = ops::add_bias(x, registry.get(names::kFeaturePrompt));
  }
  return x;
}

Tensor encode_edges(const ParamRegistry& registry, const GraphBatch& batch) {
  return ops::add(ops::gather_rows(registry.get("encoder.edge.0.weight"), batch.edge_attr0),
                  ops::gather_rows(registry.get("encoder.edge.1.weight"), batch.edge_attr1));
}

Tensor message_pass(const Tensor& x, const GraphBatch& batch,
                    const Tensor& edge_emb) {
  if (x.dim() != 2 || x.rows() != static_cast<std::size_t>(batch.num_nodes)) {
    throw DimensionError("message_pass: features " + shape_str(x.shape()) +
                         " do not match " + std::to_string(batch.num_nodes) + " nodes");
  }
  if (edge_emb.dim() != 2 || edge_emb.rows() != static_cast<std::size_t>(batch.num_edges()) ||
      edge_emb.cols() != x.cols()) {
    throw DimensionError("message_pass: edge embeddings " + shape_str(edge_emb.shape()) +
                         " do not match " + std::to_string(batch.num_edges()) +
                         " edges of width " + std::to_string(x.cols()));
  }
  const Tensor messages = ops::add(ops::gather_rows(x, batch.edge_src), edge_emb);
  return ops::scatter_sum(messages, batch.edge_dst, static_cast<std::size_t>(batch.num_nodes));
}

Tensor layer_forward(const ParamRegistry& registry, int l, const Tensor& x,
                     const GraphBatch& batch, const Tensor& edge_emb, Mode mode) {
  Tensor mp = message_pass(x, batch, edge_emb);
  if (registry.contains(names::node_prompt(l))) {
    mp = ops::add_bias(mp, registry.get(names::node_prompt(l)));
  }
  Tensor z = linear(registry, names::mlp_linear(l, 0), mp);
  z = ops::relu(z);
  z = linear(registry, names::mlp_linear(l, 2), z);
  Tensor h = batchnorm(registry, names::layer_bn(l), z, mode);

  if (registry.contains(names::adapter_par(l) + ".down.weight")) {
    auto a = AdapterModule::from_registry(registry, names::adapter_par(l));
    h = ops::add(h, adapter_forward(mp, a, mode));
  }
  if (registry.contains(names::adapter(l, 1) + ".down.weight")) {
    auto a1 = AdapterModule::from_registry(registry, names::adapter(l, 1));
    h = ops::add(h, ops::scale(adapter_forward(x, a1, mode),
                               registry.get(names::adapter_scale(l, 1))));
  }
  if (registry.contains(names::adapter(l, 2) + ".down.weight")) {
    auto a2 = AdapterModule::from_registry(registry, names::adapter(l, 2));
    h = ops::add(h, ops::scale(adapter_forward(mp, a2, mode),
                               registry.get(names::adapter_scale(l, 2))));
  }
  if (registry.contains(names::adapter_seq(l) + ".down.weight")) {
    auto a = AdapterModule::from_registry(registry, names::adapter_seq(l));
    h = ops::add(h, adapter_forward(h, a, mode));
  }
  return h;
}

Tensor node_forward(const ParamRegistry& registry, const ModelConfig& config,
                    const GraphBatch& batch, Mode mode, Rng* dropout_rng) {
  Tensor x = encode_nodes(registry, batch);
  const Tensor edge_emb = encode_edges(registry, batch);
  const bool use_dropout = mode == Mode::kTrain && config.dropout > 0.0;
  if (use_dropout && dropout_rng == nullptr) {
    throw std::invalid_argument("node_forward: train mode with dropout needs an Rng");
  }
  for (int l = 0; l < config.num_layers; ++l) {
    Tensor h = layer_forward(registry, l, x, batch, edge_emb, mode);
    if (l + 1 == config.num_layers) return h;
    x = ops::relu(h);
    if (use_dropout) x = ops::dropout(x, config.dropout, *dropout_rng, mode);
  }
  return x;
}

Tensor gin_forward(const ParamRegistry& registry, const ModelConfig& config,
                   const GraphBatch& batch, Mode mode, Rng* dropout_rng) {
  return ops::segment_mean_pool(node_forward(registry, config, batch, mode, dropout_rng),
                                batch.graph_id, static_cast<std::size_t>(batch.num_graphs));
}

Tensor classify(const ParamRegistry& registry, const Tensor& embeddings) {
  return linear(registry, names::kClassifier, embeddings);
}

}  // namespace gnnpeft
