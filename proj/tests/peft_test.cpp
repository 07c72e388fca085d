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

#include <gtest/gtest.h>

#include <set>

#include "gnnpeft/analysis.hpp"
#include "gnnpeft/errors.hpp"
#include "gnnpeft/gin.hpp"
#include "gnnpeft/peft.hpp"
#include "gnnpeft/train.hpp"
#include "support/testing.hpp"

namespace gnnpeft {
namespace {

using testing::random_tensor;

AdapterModule make_adapter(int d, int b, Rng& rng) {
  return AdapterModule{random_tensor({static_cast<std::size_t>(d), static_cast<std::size_t>(b)}, rng),
                       random_tensor({static_cast<std::size_t>(b)}, rng),
                       random_tensor({static_cast<std::size_t>(b), static_cast<std::size_t>(d)}, rng),
                       random_tensor({static_cast<std::size_t>(d)}, rng),
                       random_tensor({static_cast<std::size_t>(d)}, rng, 0.5, 1.5),
                       random_tensor({static_cast<std::size_t>(d)}, rng),
                       BatchNormStats{Tensor::zeros({static_cast<std::size_t>(d)}),
                                      Tensor::full({static_cast<std::size_t>(d)}, 1.0)}};
}

PeftConfig peft(PeftMode mode) {
  PeftConfig p;
  p.mode = mode;
  p.bottleneck = 3;
  p.lora_rank = 2;
  return p;
}

std::vector<double> values(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

std::vector<double> eval_logits(const ParamRegistry& reg, const ModelConfig& m,
                                const GraphBatch& b) {
  return values(classify(reg, gin_forward(reg, m, b, Mode::kEval, nullptr)));
}

struct Fixture {
  ModelConfig model = testing::tiny_model(6, 2);
  ParamRegistry backbone;
  Dataset data;
  GraphBatch batch;

  explicit Fixture(std::uint64_t seed = 1) {
    model.vocab.node = {2, 4};
    backbone = init_params(model, seed);
    data = generate_synthetic(testing::tiny_data(12, seed + 50));
    batch = make_batch(data, model.vocab);
  }
  ParamRegistry tuned(const PeftConfig& p, std::uint64_t seed = 7) const {
    ParamRegistry r = backbone.clone();
    apply_peft(r, model, p, seed);
    return r;
  }
};

// ---------------------------------------------------------------------------

TEST(Adapter, ZeroUpProjectionGivesZero) {
  Rng rng(1);
  AdapterModule a = make_adapter(5, 3, rng);
  for (auto& v : a.up_weight.data()) v = 0.0;
  for (auto& v : a.up_bias.data()) v = 0.0;
  for (auto& v : a.bn_beta.data()) v = 0.0;
  const Tensor x = random_tensor({7, 5}, rng, -3, 3);
  for (const Mode mode : {Mode::kEval, Mode::kTrain}) {
    const Tensor y = adapter_forward(x, a, mode);
    for (const double v : y.data()) EXPECT_EQ(v, 0.0);
  }
}

TEST(Adapter, IdentityComposition) {
  const int d = 4;
  Rng rng(2);
  AdapterModule a = make_adapter(d, d, rng);
  for (auto* t : {&a.down_weight, &a.up_weight}) {
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = 0; j < 4; ++j) t->at(i, j) = i == j ? 1.0 : 0.0;
    }
  }
  for (auto* t : {&a.down_bias, &a.up_bias, &a.bn_beta}) {
    for (auto& v : t->data()) v = 0.0;
  }
  for (auto& v : a.bn_gamma.data()) v = 1.0;
  // Eval mode normalizes with running statistics (0, 1).
  const Tensor x = random_tensor({6, 4}, rng, 0.0, 2.0);
  const Tensor y = adapter_forward(x, a, Mode::kEval);
  for (std::size_t i = 0; i < x.numel(); ++i) EXPECT_NEAR(y[i], x[i], 1e-5 * x[i] + 1e-15);
}

TEST(Adapter, WidthMismatch) {
  Rng rng(3);
  AdapterModule a = make_adapter(5, 2, rng);
  EXPECT_THROW(adapter_forward(Tensor::zeros({3, 4}), a, Mode::kEval), DimensionError);
}

TEST(Adapter, GradientsMatchFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    AdapterModule a = make_adapter(5, 3, rng);
    const Tensor x = random_tensor({8, 5}, rng, -2, 2);
    const Tensor w = random_tensor({8, 5}, rng);
    auto loss = [&] { return testing::weighted_sum(adapter_forward(x, a, Mode::kTrain), w); };
    if (testing::relu_margin(loss) < 1e-3) continue;
    const auto r = testing::grad_check(
        {x, a.down_weight, a.down_bias, a.up_weight, a.up_bias, a.bn_gamma, a.bn_beta}, loss);
    EXPECT_LT(r.max_rel, 1e-4) << "seed " << seed;
  }
}

// ---------------------------------------------------------------------------

TEST(AdapterGnn, ZeroScalingIsBitwiseBackbone) {
  const Fixture f;
  PeftConfig p = peft(PeftMode::kAdapterGnn);
  p.scaling_init = 0.0;
  EXPECT_EQ(eval_logits(f.tuned(p), f.model, f.batch), eval_logits(f.backbone, f.model, f.batch));
}

TEST(AdapterGnn, DeadAdaptersAreBitwiseBackbone) {
  const Fixture f;
  PeftConfig p = peft(PeftMode::kAdapterGnn);
  p.scaling_init = 0.7;
  ParamRegistry r = f.tuned(p);
  for (int l = 0; l < 2; ++l) {
    for (const int which : {1, 2}) {
      const std::string pre = names::adapter(l, which);
      for (const char* s : {".up.weight", ".up.bias", ".bn.bias"}) {
        Tensor t = r.get(pre + s);
        for (auto& v : t.data()) v = 0.0;
      }
    }
  }
  EXPECT_EQ(eval_logits(r, f.model, f.batch), eval_logits(f.backbone, f.model, f.batch));
}

TEST(AdapterGnn, DeviationWithinTriangleBound) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Fixture f(seed);
    const ParamRegistry r = f.tuned(peft(PeftMode::kAdapterGnn), seed);
    const Tensor x = encode_nodes(f.backbone, f.batch);
    const Tensor e = encode_edges(f.backbone, f.batch);
    for (const Mode mode : {Mode::kEval, Mode::kTrain}) {
      const Tensor base = layer_forward(f.backbone.clone(), 0, x, f.batch, e, mode);
      const Tensor with = layer_forward(r.clone(), 0, x, f.batch, e, mode);
      auto a1 = AdapterModule::from_registry(r.clone(), names::adapter(0, 1));
      auto a2 = AdapterModule::from_registry(r.clone(), names::adapter(0, 2));
      const Tensor mp = message_pass(x, f.batch, e);
      double n1 = 0, n2 = 0, dev = 0;
      const Tensor y1 = adapter_forward(x, a1, mode), y2 = adapter_forward(mp, a2, mode);
      for (const double v : y1.data()) n1 = std::max(n1, std::abs(v));
      for (const double v : y2.data()) n2 = std::max(n2, std::abs(v));
      for (std::size_t i = 0; i < base.numel(); ++i) dev = std::max(dev, std::abs(with[i] - base[i]));
      EXPECT_GT(dev, 0.0);
      EXPECT_LE(dev, 0.01 * (n1 + n2) * (1 + 1e-12)) << "seed " << seed;
    }
  }
}

// ---------------------------------------------------------------------------

bool is_weight_matrix(const std::string& name) {
  return name.ends_with(".mlp.0.weight") || name.ends_with(".mlp.2.weight");
}

std::set<std::string> trainable_names(const ParamRegistry& r) {
  std::set<std::string> out;
  for (const auto& [name, e] : r.params()) {
    if (e.trainable) out.insert(name);
  }
  return out;
}

TEST(ApplyPeft, ClassifierAlwaysTrainableAndFlagsMirrored) {
  const Fixture f;
  for (const PeftMode mode : kAllPeftModes) {
    const ParamRegistry r = f.tuned(peft(mode));
    for (const auto& [name, e] : r.params()) {
      EXPECT_EQ(e.tensor.requires_grad(), e.trainable) << name;
      if (e.group == ParamGroup::kClassifier) EXPECT_TRUE(e.trainable) << name;
      if (e.group == ParamGroup::kPeft) EXPECT_TRUE(e.trainable) << name;
      if (is_weight_matrix(name) && mode != PeftMode::kFull && mode != PeftMode::kPartial) {
        EXPECT_FALSE(e.trainable) << to_string(mode) << " " << name;
      }
    }
  }
}

TEST(ApplyPeft, BitFitTunesOnlyBiases) {
  ModelConfig m;  // d=300, L=5
  ParamRegistry r = init_params(m, 0);
  apply_peft(r, m, peft(PeftMode::kBitFit), 0);
  std::int64_t n = 0;
  for (const auto& name : trainable_names(r)) {
    EXPECT_TRUE(name.starts_with("classifier.") ||
                (name.find(".mlp.") != std::string::npos && name.ends_with(".bias")))
        << name;
    n += static_cast<std::int64_t>(r.get(name).numel());
  }
  EXPECT_EQ(n, 5 * (600 + 300) + 301);
  EXPECT_EQ(count_params(r).trainable, 4801);
}

TEST(ApplyPeft, AdapterGnnPolicy) {
  const Fixture f;
  for (const bool bias : {true, false}) {
    PeftConfig p = peft(PeftMode::kAdapterGnn);
    p.tune_backbone_bias = bias;
    const ParamRegistry r = f.tuned(p);
    for (const auto& [name, e] : r.params()) {
      if (e.group != ParamGroup::kBackbone) continue;
      const bool mlp_bias = name.find(".mlp.") != std::string::npos && name.ends_with(".bias");
      EXPECT_EQ(e.trainable, bias && mlp_bias) << name;
    }
    EXPECT_EQ(r.get(names::adapter_scale(1, 2)).item(), 0.01);
    EXPECT_EQ(r.get(names::adapter(0, 1) + ".down.weight").shape(), (Shape{6, 3}));
    EXPECT_TRUE(r.contains_buffer(names::adapter(1, 2) + ".bn.running_var"));
  }
}

TEST(ApplyPeft, ModeSpecificModules) {
  const Fixture f;
  EXPECT_TRUE(f.tuned(peft(PeftMode::kAdapterSeq)).contains(names::adapter_seq(1) + ".up.weight"));
  EXPECT_TRUE(f.tuned(peft(PeftMode::kAdapterPar)).contains(names::adapter_par(0) + ".up.weight"));
  EXPECT_EQ(f.tuned(peft(PeftMode::kIa3)).get("layer.0.mlp.2.ia3").shape(), (Shape{12}));
  const ParamRegistry lora = f.tuned(peft(PeftMode::kLora));
  EXPECT_EQ(lora.get("layer.1.mlp.0.lora_a").shape(), (Shape{6, 2}));
  for (const double v : lora.get("layer.1.mlp.0.lora_b").data()) EXPECT_EQ(v, 0.0);
  const ParamRegistry feat = f.tuned(peft(PeftMode::kPromptFeat));
  EXPECT_TRUE(feat.entry("layer.0.bn.weight").trainable);
  EXPECT_TRUE(feat.entry(names::kFeaturePrompt).trainable);
  EXPECT_TRUE(f.tuned(peft(PeftMode::kPromptNode)).contains(names::node_prompt(1)));
  const ParamRegistry full = f.tuned(peft(PeftMode::kFull));
  EXPECT_EQ(trainable_names(full).size(), full.params().size());
}

TEST(ApplyPeft, PartialTunesLastLayers) {
  ModelConfig m = testing::tiny_model(4, 4);
  for (int k = 1; k <= 4; ++k) {
    ParamRegistry r = init_params(m, 0);
    PeftConfig p = peft(PeftMode::kPartial);
    p.partial_k = k;
    apply_peft(r, m, p, 0);
    for (const auto& [name, e] : r.params()) {
      if (!name.starts_with("layer.")) continue;
      const int l = name[6] - '0';
      EXPECT_EQ(e.trainable, l >= 4 - k) << name;
    }
  }
}

TEST(ApplyPeft, UnknownModeIsConfigError) {
  EXPECT_THROW(parse_peft_mode("adapter"), ConfigError);
  EXPECT_THROW(parse_peft_mode(""), ConfigError);
  for (const PeftMode mode : kAllPeftModes) EXPECT_EQ(parse_peft_mode(to_string(mode)), mode);
}

// ---------------------------------------------------------------------------

TEST(InitTransparency, EvalForwardEqualsBackboneBitwise) {
  const Fixture f;
  const auto base = eval_logits(f.backbone, f.model, f.batch);
  PeftConfig adapter = peft(PeftMode::kAdapterGnn);
  adapter.scaling_init = 0.0;
  for (const PeftConfig& p : {adapter, peft(PeftMode::kLora), peft(PeftMode::kIa3),
                              peft(PeftMode::kBitFit), peft(PeftMode::kPromptFeat),
                              peft(PeftMode::kPromptNode), peft(PeftMode::kPartial),
                              peft(PeftMode::kFull)}) {
    EXPECT_EQ(eval_logits(f.tuned(p), f.model, f.batch), base) << to_string(p.mode);
  }
}

TEST(LoraMerge, ZeroBranchLeavesWeightsBitwise) {
  const Fixture f;
  ParamRegistry r = f.tuned(peft(PeftMode::kLora));
  const auto before = testing::snapshot(r);
  lora_merge(r, peft(PeftMode::kLora));
  for (const auto& [name, e] : r.params()) EXPECT_EQ(values(e.tensor), before.at(name)) << name;
}

TEST(LoraMerge, PreservesEvalLogits) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Fixture f(seed);
    ParamRegistry r = f.tuned(peft(PeftMode::kLora), seed);
    Rng rng(seed + 1000);
    for (const auto& [name, e] : r.params()) {
      if (e.group != ParamGroup::kPeft) continue;
      Tensor t = e.tensor;
      for (auto& v : t.data()) v = rng.uniform(-1, 1);
    }
    const auto before = eval_logits(r, f.model, f.batch);
    lora_merge(r, peft(PeftMode::kLora));
    const auto after = eval_logits(r, f.model, f.batch);
    for (std::size_t i = 0; i < before.size(); ++i) EXPECT_NEAR(after[i], before[i], 1e-9);
    EXPECT_EQ(count_params(r).by_group.at("peft").total, 0);
  }
}

TEST(LoraMerge, OtherModesAreModeErrors) {
  const Fixture f;
  ParamRegistry r = f.tuned(peft(PeftMode::kLora));
  EXPECT_THROW(lora_merge(r, peft(PeftMode::kAdapterGnn)), ModeError);
  EXPECT_THROW(lora_merge(r, peft(PeftMode::kFull)), ModeError);
}

// ---------------------------------------------------------------------------

std::int64_t trainable_count(const ModelConfig& m, const PeftConfig& p) {
  ParamRegistry r = init_params(m, 0);
  apply_peft(r, m, p, 0);
  return count_params(r).trainable;
}

TEST(Capacity, StrictlyIncreasing) {
  const ModelConfig m = testing::tiny_model(8, 4);
  std::int64_t prev = -1;
  for (int b = 0; b <= 7; ++b) {
    PeftConfig p = peft(PeftMode::kAdapterGnn);
    p.bottleneck = b;
    const auto n = trainable_count(m, p);
    EXPECT_GT(n, prev) << "b=" << b;
    prev = n;
  }
  prev = -1;
  for (int r = 1; r <= 8; ++r) {
    PeftConfig p = peft(PeftMode::kLora);
    p.lora_rank = r;
    const auto n = trainable_count(m, p);
    EXPECT_GT(n, prev) << "r=" << r;
    prev = n;
  }
  prev = -1;
  for (int k = 1; k <= 4; ++k) {
    PeftConfig p = peft(PeftMode::kPartial);
    p.partial_k = k;
    const auto n = trainable_count(m, p);
    EXPECT_GT(n, prev) << "k=" << k;
    prev = n;
  }
}

std::int64_t adaptergnn_closed_form(std::int64_t d, std::int64_t h, std::int64_t L,
                                    std::int64_t b, std::int64_t T, bool bias) {
  const std::int64_t per_layer =
      2 * (d * b + b + b * d + d + 2 * d) + 2 + (bias ? h + d : 0);
  return L * per_layer + d * T + T;
}

TEST(Capacity, AdapterGnnMatchesClosedForm) {
  for (const int d : {4, 17, 300}) {
    for (const int b : {1, 5, 15}) {
      if (b >= d) continue;
      for (const bool bias : {true, false}) {
        ModelConfig m;
        m.emb_dim = d;
        m.mlp_hidden = 2 * d;
        m.num_layers = 3;
        m.num_tasks = 2;
        PeftConfig p = peft(PeftMode::kAdapterGnn);
        p.bottleneck = b;
        p.tune_backbone_bias = bias;
        ParamRegistry r = init_params(m, 0);
        apply_peft(r, m, p, 0);
        const ParamCounts c = count_params(r);
        const std::int64_t peft_total = 3 * (2 * (d * b + b + b * d + d + 2 * d) + 2);
        EXPECT_EQ(c.trainable, adaptergnn_closed_form(d, 2 * d, 3, b, 2, bias));
        EXPECT_EQ(c.total, model_param_count(m) + peft_total);
      }
    }
  }
}

TEST(Capacity, ReferenceFractions) {
  ModelConfig m;  // d=300, L=5, T=1
  PeftConfig p = peft(PeftMode::kAdapterGnn);
  p.bottleneck = 15;
  ParamRegistry r = init_params(m, 0);
  apply_peft(r, m, p, 0);
  const double f15 = count_params(r).fraction();
  EXPECT_GE(f15, 0.040);
  EXPECT_LE(f15, 0.067);
  p.bottleneck = 5;
  r = init_params(m, 0);
  apply_peft(r, m, p, 0);
  const double f5 = count_params(r).fraction();
  EXPECT_GE(f5, 0.015);
  EXPECT_LE(f5, 0.029);
}

// ---------------------------------------------------------------------------

TEST(FreezeInvariance, EveryModeLeavesFrozenTensorsBitwise) {
  ModelConfig m = testing::tiny_model(8, 2);
  m.dropout = 0.1;
  m.vocab.node = {2, 4};
  const Dataset data = generate_synthetic(testing::tiny_data(40, 5));
  TrainConfig tc;
  tc.epochs = 5;
  tc.batch_size = 8;
  tc.lr = 1e-2;
  for (const PeftMode mode : kAllPeftModes) {
    ParamRegistry r = init_params(m, 2);
    apply_peft(r, m, peft(mode), 2);
    const auto before = testing::snapshot(r);
    std::set<std::string> frozen;
    for (const auto& [name, e] : r.params()) {
      if (!e.trainable) frozen.insert(name);
    }
    int checked = 0;
    TrainOptions opts;
    opts.eval_every_epoch = false;
    opts.on_epoch = [&](int, const ParamRegistry& reg) {
      for (const auto& name : frozen) {
        EXPECT_EQ(values(reg.get(name)), before.at(name)) << to_string(mode) << " " << name;
      }
      ++checked;
    };
    train_supervised(data, data, r, m, tc, opts);
    EXPECT_EQ(checked, 5);
    bool moved = false;
    for (const auto& [name, e] : r.params()) {
      if (e.trainable && values(e.tensor) != before.at(name)) moved = true;
    }
    EXPECT_TRUE(moved) << to_string(mode);
  }
}

TEST(TunedEntries, CheckpointSelection) {
  const Fixture f;
  const ParamRegistry r = f.tuned(peft(PeftMode::kBitFit));
  EXPECT_TRUE(is_tuned_entry("classifier.weight", r.entry("classifier.weight"), PeftMode::kBitFit));
  EXPECT_TRUE(is_tuned_entry("layer.0.mlp.0.bias", r.entry("layer.0.mlp.0.bias"), PeftMode::kBitFit));
  EXPECT_FALSE(is_tuned_entry("layer.0.mlp.0.weight", r.entry("layer.0.mlp.0.weight"),
                              PeftMode::kBitFit));
  EXPECT_TRUE(is_tuned_entry("layer.0.mlp.0.weight", r.entry("layer.0.mlp.0.weight"),
                             PeftMode::kFull));
}

}  // namespace
}  // namespace gnnpeft
