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

#include "gnnpeft/peft.hpp"

#include <Eigen/Core>

#include "gnnpeft/errors.hpp"
#include "gnnpeft/gin.hpp"

namespace gnnpeft {

namespace names {
std::string adapter(int l, int which) {
  return layer(l) + ".adapter" + std::to_string(which);
}
std::string adapter_scale(int l, int which) {
  return layer(l) + ".scale" + std::to_string(which);
}
std::string adapter_seq(int l) { return layer(l) + ".adapter_seq"; }
std::string adapter_par(int l) { return layer(l) + ".adapter_par"; }
std::string node_prompt(int l) { return layer(l) + ".prompt"; }
}  // namespace names

namespace {

void add_adapter(ParamRegistry& reg, const std::string& prefix, int d, int b,
                 const Rng& rng) {
  // Both projections use the fan-in of the embedding width.
  const double bound = 1.0 / std::sqrt(static_cast<double>(d));
  const auto dd = static_cast<std::size_t>(d), bb = static_cast<std::size_t>(b);
  auto uniform = [&](Shape shape, const std::string& name) {
    Rng r = rng.split(name);
    Tensor t = Tensor::zeros(std::move(shape));
    for (auto& v : t.data()) v = r.uniform(-bound, bound);
    return t;
  };
  reg.add(prefix + ".down.weight", uniform({dd, bb}, prefix + ".down.weight"),
          ParamGroup::kPeft, true);
  reg.add(prefix + ".down.bias", Tensor::zeros({bb}), ParamGroup::kPeft, true);
  reg.add(prefix + ".up.weight", uniform({bb, dd}, prefix + ".up.weight"),
          ParamGroup::kPeft, true);
  reg.add(prefix + ".up.bias", Tensor::zeros({dd}), ParamGroup::kPeft, true);
  add_batchnorm(reg, prefix + ".bn", d, ParamGroup::kPeft, true);
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

void set_layer_trainable(ParamRegistry& reg, int l, bool weights, bool biases,
                         bool bn) {
  for (const int idx : {0, 2}) {
    reg.set_trainable(names::mlp_linear(l, idx) + ".weight", weights);
    reg.set_trainable(names::mlp_linear(l, idx) + ".bias", biases);
  }
  reg.set_trainable(names::layer_bn(l) + ".weight", bn);
  reg.set_trainable(names::layer_bn(l) + ".bias", bn);
}

}  // namespace

AdapterModule AdapterModule::from_registry(const ParamRegistry& registry,
                                           const std::string& prefix) {
  return AdapterModule{registry.get(prefix + ".down.weight"),
                       registry.get(prefix + ".down.bias"),
                       registry.get(prefix + ".up.weight"),
                       registry.get(prefix + ".up.bias"),
                       registry.get(prefix + ".bn.weight"),
                       registry.get(prefix + ".bn.bias"),
                       BatchNormStats{registry.buffer(prefix + ".bn.running_mean"),
                                      registry.buffer(prefix + ".bn.running_var")}};
}

Tensor adapter_forward(const Tensor& x, AdapterModule& module, Mode mode) {
  if (x.dim() != 2 || x.cols() != module.down_weight.rows()) {
    throw DimensionError("adapter: input " + shape_str(x.shape()) +
                         " does not match down-projection " +
                         shape_str(module.down_weight.shape()));
  }
  Tensor z = ops::add_bias(ops::matmul(x, module.down_weight), module.down_bias);
  z = ops::relu(z);
  z = ops::add_bias(ops::matmul(z, module.up_weight), module.up_bias);
  return ops::batchnorm1d(z, module.bn_gamma, module.bn_beta, module.bn_stats, mode);
}

void apply_peft(ParamRegistry& registry, const ModelConfig& model,
                const PeftConfig& config, std::uint64_t seed) {
  model.validate();
  config.validate(model);
  const Rng rng = Rng(seed).split("peft");
  const int d = model.emb_dim, L = model.num_layers;
  const auto du = static_cast<std::size_t>(d);

  if (config.mode == PeftMode::kFull) {
    registry.set_all_trainable(true);
    return;
  }
  for (const auto& [name, e] : registry.params()) {
    if (e.group == ParamGroup::kBackbone) registry.set_trainable(name, false);
  }
  for (const auto& [name, e] : registry.params()) {
    if (e.group == ParamGroup::kClassifier) registry.set_trainable(name, true);
  }

  switch (config.mode) {
    case PeftMode::kAdapterGnn:
      for (int l = 0; l < L; ++l) {
        if (config.bottleneck > 0) {
          for (const int which : {1, 2}) {
            add_adapter(registry, names::adapter(l, which), d, config.bottleneck, rng);
            registry.add(names::adapter_scale(l, which), Tensor::scalar(config.scaling_init),
                         ParamGroup::kPeft, true);
          }
        }
        set_layer_trainable(registry, l, false, config.tune_backbone_bias,
                            config.tune_backbone_bn);
      }
      break;
    case PeftMode::kAdapterSeq:
    case PeftMode::kAdapterPar:
      for (int l = 0; l < L; ++l) {
        if (config.bottleneck > 0) {
          add_adapter(registry,
                      config.mode == PeftMode::kAdapterSeq ? names::adapter_seq(l)
                                                           : names::adapter_par(l),
                      d, config.bottleneck, rng);
        }
        set_layer_trainable(registry, l, false, false, config.tune_backbone_bn);
      }
      break;
    case PeftMode::kLora:
      for (int l = 0; l < L; ++l) {
        for (const int idx : {0, 2}) {
          const std::string prefix = names::mlp_linear(l, idx);
          const Tensor& w = registry.get(prefix + ".weight");
          const auto r = static_cast<std::size_t>(config.lora_rank);
          Tensor a = Tensor::zeros({w.rows(), r});
          Rng ar = rng.split(prefix + ".lora_a");
          for (auto& v : a.data()) v = ar.normal(0.0, 0.02);
          registry.add(prefix + ".lora_a", std::move(a), ParamGroup::kPeft, true);
          registry.add(prefix + ".lora_b", Tensor::zeros({r, w.cols()}), ParamGroup::kPeft,
                       true);
        }
      }
      break;
    case PeftMode::kBitFit:
      for (int l = 0; l < L; ++l) set_layer_trainable(registry, l, false, true, false);
      break;
    case PeftMode::kIa3:
      for (int l = 0; l < L; ++l) {
        for (const int idx : {0, 2}) {
          const std::string prefix = names::mlp_linear(l, idx);
          const std::size_t n_in = registry.get(prefix + ".weight").rows();
          registry.add(prefix + ".ia3", Tensor::full({n_in}, 1.0), ParamGroup::kPeft, true);
        }
      }
      break;
    case PeftMode::kPromptFeat:
      registry.add(names::kFeaturePrompt, Tensor::zeros({du}), ParamGroup::kPeft, true);
      for (int l = 0; l < L; ++l) set_layer_trainable(registry, l, false, false, true);
      break;
    case PeftMode::kPromptNode:
      for (int l = 0; l < L; ++l) {
        registry.add(names::node_prompt(l), Tensor::zeros({du}), ParamGroup::kPeft, true);
      }
      break;
    case PeftMode::kPartial:
      for (int l = L - config.partial_k; l < L; ++l) {
        set_layer_trainable(registry, l, true, true, true);
      }
      break;
    case PeftMode::kFull:
      break;
  }
}

void lora_merge(ParamRegistry& registry, const PeftConfig& config) {
  if (config.mode != PeftMode::kLora) {
    throw ModeError("lora_merge requires lora mode, got " + std::string(to_string(config.mode)));
  }
  using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  std::vector<std::string> prefixes;
  for (const auto& [name, _] : registry.params()) {
    if (ends_with(name, ".lora_a")) prefixes.push_back(name.substr(0, name.size() - 7));
  }
  for (const auto& prefix : prefixes) {
    Tensor w = registry.get(prefix + ".weight");
    const Tensor& a = registry.get(prefix + ".lora_a");
    const Tensor& b = registry.get(prefix + ".lora_b");
    Eigen::Map<RowMatrix> wm(w.data().data(), static_cast<Eigen::Index>(w.rows()),
                             static_cast<Eigen::Index>(w.cols()));
    wm.noalias() += Eigen::Map<const RowMatrix>(a.data().data(), static_cast<Eigen::Index>(a.rows()),
                                                static_cast<Eigen::Index>(a.cols())) *
                    Eigen::Map<const RowMatrix>(b.data().data(), static_cast<Eigen::Index>(b.rows()),
                                                static_cast<Eigen::Index>(b.cols()));
    registry.erase(prefix + ".lora_a");
    registry.erase(prefix + ".lora_b");
  }
}

bool is_tuned_entry(const std::string& /*name*/, const ParamEntry& entry, PeftMode mode) {
  if (mode == PeftMode::kFull) return true;
  return entry.trainable || entry.group != ParamGroup::kBackbone;
}

}  // namespace gnnpeft
