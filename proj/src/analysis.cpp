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

#include "gnnpeft/analysis.hpp"

#include <cmath>
#include <stdexcept>

#include "gnnpeft/gin.hpp"
#include "gnnpeft/peft.hpp"

namespace gnnpeft {

double hoeffding_gap(double log_hypothesis_size, double n, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw std::domain_error("delta must lie in (0, 1), got " + std::to_string(delta));
  }
  if (!(n >= 1.0)) throw std::domain_error("n must be at least 1");
  if (!(log_hypothesis_size >= 0.0)) {
    throw std::domain_error("log hypothesis size must be non-negative");
  }
  return std::sqrt((log_hypothesis_size + std::log(2.0 / delta)) / (2.0 * n));
}

double bound(const BoundInput& input) {
  if (!(input.train_error >= 0.0 && input.train_error <= 1.0)) {
    throw std::domain_error("train error must lie in [0, 1]");
  }
  return input.train_error + hoeffding_gap(input.log_hypothesis_size, input.n, input.delta);
}

double log_hypothesis_from_count(std::int64_t parameter_count, double c) {
  return c * static_cast<double>(parameter_count);
}

nlohmann::ordered_json bound_report(const BoundInput& input) {
  nlohmann::ordered_json j;
  j["train_error"] = input.train_error;
  j["log_hypothesis_size"] = input.log_hypothesis_size;
  j["n"] = input.n;
  j["delta"] = input.delta;
  j["gap"] = hoeffding_gap(input.log_hypothesis_size, input.n, input.delta);
  j["bound"] = bound(input);
  return j;
}

ParamCounts count_params(const ParamRegistry& registry) {
  ParamCounts c;
  for (const auto& group : {ParamGroup::kBackbone, ParamGroup::kPeft, ParamGroup::kClassifier}) {
    c.by_group[std::string(to_string(group))] = {};
  }
  for (const auto& [name, e] : registry.params()) {
    const auto n = static_cast<std::int64_t>(e.tensor.numel());
    auto& g = c.by_group[std::string(to_string(e.group))];
    g.total += n;
    c.total += n;
    if (e.trainable) {
      g.trainable += n;
      c.trainable += n;
    }
  }
  return c;
}

nlohmann::ordered_json counts_json(const ParamCounts& counts) {
  nlohmann::ordered_json j;
  j["total"] = counts.total;
  j["trainable"] = counts.trainable;
  j["fraction"] = counts.fraction();
  for (const auto& [name, g] : counts.by_group) {
    j["groups"][name] = {{"total", g.total}, {"trainable", g.trainable}};
  }
  return j;
}

FlopsEstimate linear_flops(std::int64_t batch_size, std::int64_t n_in,
                           std::int64_t n_out, Phase phase, bool input_grad,
                           bool weight_grad, bool bias_grad) {
  FlopsEstimate e;
  const std::int64_t mac = 2 * batch_size * n_in * n_out;
  e.forward = mac;
  if (phase == Phase::kTrain) {
    if (input_grad) e.backward += mac;
    if (weight_grad) e.backward += mac;
    if (bias_grad) e.backward += batch_size * n_out;
  }
  return e;
}

namespace {

// Walks the layer stack the way the forward pass does, tracking whether each
// activation depends on a trainable parameter.
class FlopsWalker {
 public:
  FlopsWalker(const ParamRegistry& reg, std::int64_t batch, Phase phase)
      : reg_(reg), b_(batch), phase_(phase) {}

  FlopsEstimate take() {
    FlopsEstimate out = acc_;
    acc_ = {};
    return out;
  }

  bool trainable(const std::string& name) const {
    return reg_.contains(name) && reg_.entry(name).trainable;
  }

  void fwd(std::int64_t v) { acc_.forward += v; }
  void bwd(std::int64_t v) {
    if (phase_ == Phase::kTrain) acc_.backward += v;
  }

  bool linear(const std::string& prefix, bool rg_in) {
    const Tensor& w = reg_.get(prefix + ".weight");
    const auto n_in = static_cast<std::int64_t>(w.rows());
    const auto n_out = static_cast<std::int64_t>(w.cols());
    bool rg_x = rg_in;
    if (reg_.contains(prefix + ".ia3")) {
      fwd(FlopsConstants::kMulColsForward * b_ * n_in);
      if (rg_in) bwd(FlopsConstants::kMulColsBackwardInput * b_ * n_in);
      if (trainable(prefix + ".ia3")) bwd(FlopsConstants::kMulColsBackwardWeight * b_ * n_in);
      rg_x = rg_x || trainable(prefix + ".ia3");
    }
    const bool w_tr = trainable(prefix + ".weight");
    const bool b_tr = trainable(prefix + ".bias");
    const auto main = linear_flops(b_, n_in, n_out, phase_, rg_x, w_tr, b_tr);
    fwd(main.forward);
    bwd(main.backward);
    bool rg_out = rg_x || w_tr || b_tr;
    if (reg_.contains(prefix + ".lora_a")) {
      const auto r = static_cast<std::int64_t>(reg_.get(prefix + ".lora_a").cols());
      const bool a_tr = trainable(prefix + ".lora_a");
      const bool bb_tr = trainable(prefix + ".lora_b");
      const auto down = linear_flops(b_, n_in, r, phase_, rg_in, a_tr, false);
      const auto up = linear_flops(b_, r, n_out, phase_, rg_in || a_tr, bb_tr, false);
      fwd(down.forward + up.forward + FlopsConstants::kAddForward * b_ * n_out);
      bwd(down.backward + up.backward);
      rg_out = rg_out || rg_in || a_tr || bb_tr;
    }
    return rg_out;
  }

  bool relu(std::int64_t width, bool rg) {
    fwd(FlopsConstants::kReluForward * b_ * width);
    if (rg) bwd(FlopsConstants::kReluBackward * b_ * width);
    return rg;
  }

  bool batchnorm(const std::string& prefix, std::int64_t width, bool rg_in) {
    fwd((phase_ == Phase::kTrain ? FlopsConstants::kBnTrainForward
                                 : FlopsConstants::kBnEvalForward) *
        b_ * width);
    const bool affine = trainable(prefix + ".weight") || trainable(prefix + ".bias");
    if (rg_in) bwd(FlopsConstants::kBnBackwardInput * b_ * width);
    if (affine) bwd(FlopsConstants::kBnBackwardAffine * b_ * width);
    return rg_in || affine;
  }

  bool adapter(const std::string& prefix, std::int64_t width, bool rg_in) {
    const auto b = static_cast<std::int64_t>(reg_.get(prefix + ".down.weight").cols());
    bool rg = linear(prefix + ".down", rg_in);
    rg = relu(b, rg);
    rg = linear(prefix + ".up", rg);
    return batchnorm(prefix + ".bn", width, rg);
  }

  bool scale(const std::string& name, std::int64_t width, bool rg_in) {
    fwd(FlopsConstants::kScaleForward * b_ * width);
    if (rg_in) bwd(FlopsConstants::kScaleBackwardInput * b_ * width);
    const bool tr = trainable(name);
    if (tr) bwd(FlopsConstants::kScaleBackwardFactor * b_ * width);
    return rg_in || tr;
  }

  bool add_vector(const std::string& name, std::int64_t width, bool rg_in) {
    fwd(FlopsConstants::kAddForward * b_ * width);
    const bool tr = trainable(name);
    if (tr) bwd(FlopsConstants::kVectorBackward * b_ * width);
    return rg_in || tr;
  }

  void add(std::int64_t width) { fwd(FlopsConstants::kAddForward * b_ * width); }

 private:
  const ParamRegistry& reg_;
  std::int64_t b_;
  Phase phase_;
  FlopsEstimate acc_;
};

}  // namespace

FlopsReport estimate_flops(const ModelConfig& model, const PeftConfig& peft,
                           std::int64_t batch_size, Phase phase) {
  ParamRegistry reg = init_params(model, 0);
  apply_peft(reg, model, peft, 0);
  FlopsWalker w(reg, batch_size, phase);
  const std::int64_t d = model.emb_dim, h = model.mlp_hidden;

  bool rg_x = false;
  for (const auto& [name, e] : reg.params()) {
    if (name.starts_with("encoder.") && e.trainable) rg_x = true;
  }
  if (reg.contains(names::kFeaturePrompt)) rg_x = w.add_vector(names::kFeaturePrompt, d, rg_x);

  FlopsReport report;
  for (int l = 0; l < model.num_layers; ++l) {
    bool rg_mp = rg_x;
    if (reg.contains(names::node_prompt(l))) rg_mp = w.add_vector(names::node_prompt(l), d, rg_mp);
    bool rg = w.linear(names::mlp_linear(l, 0), rg_mp);
    rg = w.relu(h, rg);
    rg = w.linear(names::mlp_linear(l, 2), rg);
    rg = w.batchnorm(names::layer_bn(l), d, rg);
    if (reg.contains(names::adapter_par(l) + ".down.weight")) {
      rg = w.adapter(names::adapter_par(l), d, rg_mp) || rg;
      w.add(d);
    }
    if (reg.contains(names::adapter(l, 1) + ".down.weight")) {
      bool a = w.adapter(names::adapter(l, 1), d, rg_x);
      a = w.scale(names::adapter_scale(l, 1), d, a);
      w.add(d);
      rg = rg || a;
    }
    if (reg.contains(names::adapter(l, 2) + ".down.weight")) {
      bool a = w.adapter(names::adapter(l, 2), d, rg_mp);
      a = w.scale(names::adapter_scale(l, 2), d, a);
      w.add(d);
      rg = rg || a;
    }
    if (reg.contains(names::adapter_seq(l) + ".down.weight")) {
      rg = w.adapter(names::adapter_seq(l), d, rg) || rg;
      w.add(d);
    }
    if (l + 1 < model.num_layers) rg = w.relu(d, rg);
    rg_x = rg;
    const FlopsEstimate layer = w.take();
    report.per_layer.push_back(layer);
    report.total.forward += layer.forward;
    report.total.backward += layer.backward;
  }
  return report;
}

}  // namespace gnnpeft
