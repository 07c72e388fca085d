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

// Acceptance run: one PASS/FAIL line per criterion, exit status 0 only when
// every selected criterion passes.

#include <CLI11.hpp>
#include <boost/multiprecision/cpp_dec_float.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

#include "gnnpeft/analysis.hpp"
#include "gnnpeft/cli.hpp"
#include "gnnpeft/gin.hpp"
#include "gnnpeft/peft.hpp"
#include "gnnpeft/train.hpp"
#include "support/testing.hpp"

namespace gnnpeft {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (ok) return;
    if (pass) detail << "failed: ";
    else detail << "; ";
    detail << what;
    pass = false;
  }
};

std::string sci(double v) {
  std::ostringstream os;
  os << std::setprecision(3) << std::scientific << v;
  return os.str();
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream os;
  os << std::setprecision(digits) << std::fixed << v;
  return os.str();
}

std::vector<double> values(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

std::vector<double> eval_logits(const ParamRegistry& reg, const ModelConfig& m,
                                const GraphBatch& b) {
  return values(classify(reg, gin_forward(reg, m, b, Mode::kEval, nullptr)));
}

PeftConfig peft(PeftMode mode) {
  PeftConfig p;
  p.mode = mode;
  p.bottleneck = 3;
  p.lora_rank = 2;
  return p;
}

ModelConfig small_model(int d = 6) {
  ModelConfig m = testing::tiny_model(d, 2);
  m.vocab.node = {2, 4};
  return m;
}

// ---------------------------------------------------------------------------

void gradients(Verdict& v) {
  double worst = 0;
  std::string worst_op;
  int op_trials = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed, ++op_trials) {
    for (const auto& [name, r] : testing::op_grad_checks(seed)) {
      if (r.max_rel > worst) {
        worst = r.max_rel;
        worst_op = name;
      }
    }
  }
  int model_trials = 0;
  double model_worst = 0;
  for (std::uint64_t seed = 0; model_trials < 100 && seed < 1000; ++seed) {
    const auto r = testing::model_grad_check(seed);
    if (!r) continue;
    model_worst = std::max(model_worst, r->max_rel);
    ++model_trials;
  }
  v.require(worst < 1e-4, "op " + worst_op + " rel " + sci(worst));
  v.require(model_trials == 100, "only " + std::to_string(model_trials) + " model trials");
  v.require(model_worst < 1e-4, "model rel " + sci(model_worst));
  v.detail << (v.pass ? "" : "; ") << "ops max rel " << sci(worst) << " over " << op_trials
           << " trials, model max rel " << sci(model_worst) << " over " << model_trials
           << " trials (tol 1e-4)";
}

void freeze(Verdict& v) {
  ModelConfig m = small_model(8);
  m.dropout = 0.1;
  const Dataset data = generate_synthetic(testing::tiny_data(40, 5));
  TrainConfig tc;
  tc.epochs = 5;
  tc.batch_size = 8;
  tc.lr = 1e-2;
  int frozen_checked = 0;
  for (const PeftMode mode : kAllPeftModes) {
    ParamRegistry r = init_params(m, 2);
    apply_peft(r, m, peft(mode), 2);
    const auto before = testing::snapshot(r);
    std::vector<std::string> frozen;
    for (const auto& [name, e] : r.params()) {
      if (!e.trainable) frozen.push_back(name);
    }
    int epochs = 0;
    bool unchanged = true;
    TrainOptions opts;
    opts.eval_every_epoch = false;
    opts.on_epoch = [&](int, const ParamRegistry& reg) {
      for (const auto& name : frozen) unchanged = unchanged && values(reg.get(name)) == before.at(name);
      ++epochs;
    };
    train_supervised(data, data, r, m, tc, opts);
    bool moved = false;
    for (const auto& [name, e] : r.params()) {
      if (e.trainable && values(e.tensor) != before.at(name)) moved = true;
    }
    const std::string mode_name(to_string(mode));
    v.require(epochs == 5, mode_name + " ran " + std::to_string(epochs) + " epochs");
    v.require(unchanged, mode_name + " moved a frozen tensor");
    v.require(moved, mode_name + " trained nothing");
    frozen_checked += static_cast<int>(frozen.size());
  }
  v.detail << (v.pass ? "" : "; ") << "10 modes x 5 epochs, " << frozen_checked
           << " frozen tensors bitwise unchanged";
}

void transparency(Verdict& v) {
  double worst_ratio = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const ModelConfig m = small_model();
    const ParamRegistry backbone = init_params(m, seed);
    const Dataset data = generate_synthetic(testing::tiny_data(12, seed + 50));
    const GraphBatch batch = make_batch(data, m.vocab);

    PeftConfig zero = peft(PeftMode::kAdapterGnn);
    zero.scaling_init = 0.0;
    ParamRegistry r0 = backbone.clone();
    apply_peft(r0, m, zero, seed);
    v.require(eval_logits(r0, m, batch) == eval_logits(backbone, m, batch),
              "s=0 not bitwise at seed " + std::to_string(seed));

    PeftConfig small = peft(PeftMode::kAdapterGnn);
    small.scaling_init = 0.01;
    ParamRegistry r = backbone.clone();
    apply_peft(r, m, small, seed);
    const Tensor x = encode_nodes(backbone, batch);
    const Tensor e = encode_edges(backbone, batch);
    const Tensor base = layer_forward(backbone.clone(), 0, x, batch, e, Mode::kEval);
    const Tensor with = layer_forward(r.clone(), 0, x, batch, e, Mode::kEval);
    auto a1 = AdapterModule::from_registry(r.clone(), names::adapter(0, 1));
    auto a2 = AdapterModule::from_registry(r.clone(), names::adapter(0, 2));
    const Tensor y1 = adapter_forward(x, a1, Mode::kEval);
    const Tensor y2 = adapter_forward(message_pass(x, batch, e), a2, Mode::kEval);
    double n1 = 0, n2 = 0, dev = 0;
    for (const double y : y1.data()) n1 = std::max(n1, std::abs(y));
    for (const double y : y2.data()) n2 = std::max(n2, std::abs(y));
    for (std::size_t i = 0; i < base.numel(); ++i) dev = std::max(dev, std::abs(with[i] - base[i]));
    const double bound = 0.01 * (n1 + n2);
    v.require(dev > 0 && dev <= bound * (1 + 1e-12),
              "deviation " + sci(dev) + " vs bound " + sci(bound) + " at seed " + std::to_string(seed));
    worst_ratio = std::max(worst_ratio, dev / bound);
  }
  v.detail << (v.pass ? "" : "; ") << "s=0 bitwise on 10 models; s=0.01 deviation at most "
           << fixed(worst_ratio, 3) << " of the triangle bound";
}

void lora(Verdict& v) {
  double worst = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const ModelConfig m = small_model();
    ParamRegistry r = init_params(m, seed);
    apply_peft(r, m, peft(PeftMode::kLora), seed);
    Rng rng(seed + 1000);
    for (const auto& [name, e] : r.params()) {
      if (e.group != ParamGroup::kPeft) continue;
      Tensor t = e.tensor;
      for (auto& x : t.data()) x = rng.uniform(-1, 1);
    }
    const GraphBatch batch = make_batch(generate_synthetic(testing::tiny_data(12, seed + 50)), m.vocab);
    const auto before = eval_logits(r, m, batch);
    lora_merge(r, peft(PeftMode::kLora));
    const auto after = eval_logits(r, m, batch);
    for (std::size_t i = 0; i < before.size(); ++i) worst = std::max(worst, std::abs(after[i] - before[i]));
    v.require(count_params(r).by_group.at("peft").total == 0, "peft params left after merge");
  }
  v.require(worst <= 1e-9, "max deviation " + sci(worst));
  v.detail << (v.pass ? "" : "; ") << "max |logit change| " << sci(worst)
           << " over 20 random models (tol 1e-9)";
}

std::int64_t adaptergnn_closed_form(std::int64_t d, std::int64_t h, std::int64_t L,
                                    std::int64_t b, std::int64_t T) {
  return L * (2 * (d * b + b + b * d + d + 2 * d) + 2 + h + d) + d * T + T;
}

void ratios(Verdict& v) {
  auto counts = [](const ModelConfig& m, const PeftConfig& p) {
    ParamRegistry r = init_params(m, 0);
    apply_peft(r, m, p, 0);
    return count_params(r);
  };
  ModelConfig m;  // d=300, L=5, T=1
  PeftConfig p = peft(PeftMode::kAdapterGnn);
  p.bottleneck = 15;
  const ParamCounts c15 = counts(m, p);
  p.bottleneck = 5;
  const ParamCounts c5 = counts(m, p);
  v.require(c15.fraction() >= 0.040 && c15.fraction() <= 0.067,
            "b=15 fraction " + fixed(c15.fraction()));
  v.require(c5.fraction() >= 0.015 && c5.fraction() <= 0.029,
            "b=5 fraction " + fixed(c5.fraction()));
  int forms = 0;
  for (const int d : {4, 17, 64, 300}) {
    for (const int b : {1, 5, 15}) {
      if (b >= d) continue;
      ModelConfig mm;
      mm.emb_dim = d;
      mm.mlp_hidden = 2 * d;
      mm.num_layers = 3;
      mm.num_tasks = 2;
      PeftConfig pp = peft(PeftMode::kAdapterGnn);
      pp.bottleneck = b;
      const ParamCounts c = counts(mm, pp);
      const std::int64_t adapters = 3 * (2 * (d * b + b + b * d + d + 2 * d) + 2);
      v.require(c.trainable == adaptergnn_closed_form(d, 2 * d, 3, b, 2),
                "trainable count at d=" + std::to_string(d) + " b=" + std::to_string(b));
      v.require(c.total == model_param_count(mm) + adapters,
                "total count at d=" + std::to_string(d) + " b=" + std::to_string(b));
      ++forms;
    }
  }
  v.require(counts(m, peft(PeftMode::kBitFit)).trainable == 4801, "bitfit count");
  v.detail << (v.pass ? "" : "; ") << "b=15 " << fixed(100 * c15.fraction(), 2)
           << "% in [4.0, 6.7], b=5 " << fixed(100 * c5.fraction(), 2)
           << "% in [1.5, 2.9], " << forms << " closed-form counts exact";
}

void bound_calculator(Verdict& v) {
  using Big = boost::multiprecision::cpp_dec_float_50;
  auto oracle = [](double h, double n, double d) {
    const Big g = sqrt((Big(h) + log(Big(2) / Big(d))) / (Big(2) * Big(n)));
    return g.convert_to<double>();
  };
  Rng rng(2);
  double worst = 0;
  for (int i = 0; i < 20; ++i) {
    const double h = rng.uniform(0, 1e6), n = std::floor(rng.uniform(1, 1e6));
    const double d = rng.uniform(1e-9, 1.0 - 1e-9);
    const double want = oracle(h, n, d);
    worst = std::max(worst, std::abs(hoeffding_gap(h, n, d) - want) / want);
  }
  Rng pairs(3);
  int violations = 0;
  for (int i = 0; i < 1000; ++i) {
    const double h = pairs.uniform(0, 1e4), n = pairs.uniform(1, 1e5), d = pairs.uniform(0.001, 0.9);
    const double h2 = h * pairs.uniform(1.01, 3), n2 = n * pairs.uniform(1.01, 3);
    const double d2 = d + pairs.uniform(0.001, 0.999 - d);
    const double g = hoeffding_gap(h, n, d);
    if (!(g < hoeffding_gap(h2, n, d))) ++violations;
    if (!(g > hoeffding_gap(h, n2, d))) ++violations;
    if (!(g > hoeffding_gap(h, n, d2))) ++violations;
  }
  v.require(worst < 1e-12, "rel error " + sci(worst));
  v.require(violations == 0, std::to_string(violations) + " monotonicity violations");
  v.detail << (v.pass ? "" : "; ") << "max rel error " << sci(worst)
           << " on 20 inputs (tol 1e-12), 1000 ordered pairs monotone";
}

double pair_oracle(const std::vector<double>& s, const std::vector<int>& y) {
  double credit = 0, pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      pairs += 1;
      credit += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
    }
  }
  return credit / pairs;
}

void auc(Verdict& v) {
  Rng rng(12);
  int instances = 0, mismatches = 0;
  while (instances < 100) {
    const std::size_t g = 6 + rng.below(40), t = 1 + rng.below(4);
    Tensor s = Tensor::zeros({g, t}), y = Tensor::zeros({g, t}), m = Tensor::zeros({g, t});
    for (std::size_t i = 0; i < g * t; ++i) {
      s[i] = static_cast<double>(rng.below(6)) / 2.0;
      y[i] = rng.bernoulli(0.5) ? 1.0 : 0.0;
      m[i] = rng.bernoulli(0.8) ? 1.0 : 0.0;
    }
    double total = 0;
    int valid = 0;
    for (std::size_t c = 0; c < t; ++c) {
      std::vector<double> ss;
      std::vector<int> yy;
      for (std::size_t r = 0; r < g; ++r) {
        if (m.at(r, c) == 0.0) continue;
        ss.push_back(s.at(r, c));
        yy.push_back(static_cast<int>(y.at(r, c)));
      }
      const auto pos = std::count(yy.begin(), yy.end(), 1);
      if (pos == 0 || pos == static_cast<long>(yy.size())) continue;
      total += pair_oracle(ss, yy);
      ++valid;
    }
    if (valid == 0) continue;
    if (roc_auc(s, y, m) != total / valid) ++mismatches;
    ++instances;
  }
  v.require(mismatches == 0, std::to_string(mismatches) + " mismatches");
  v.detail << (v.pass ? "" : "; ") << "exact match on " << instances
           << " tied, masked multi-task instances";
}

// ---------------------------------------------------------------------------
// Pinned sweep recipes.

ConfigMap planted_base() {
  return {
      {"graphs", "600"},     {"min_nodes", "12"},    {"max_nodes", "24"},
      {"edge_prob", "0.4"},  {"tasks", "8"},         {"node_vocab0", "8"},
      {"split_train", "0.5"}, {"split_valid", "0.1"}, {"split_test", "0.4"},
      {"layers", "2"},       {"epochs", "20"},       {"dropout", "0"},
      {"lr", "0.01"},
  };
}

const std::vector<std::uint64_t> kSeeds{0, 1, 2, 3, 4};

std::vector<double> median_by(const std::vector<ExperimentResult>& results,
                              const std::vector<int>& keys,
                              const std::function<int(const ExperimentResult&)>& key,
                              const std::function<double(const ExperimentResult&)>& value) {
  std::vector<double> out;
  for (const int k : keys) {
    std::vector<double> vals;
    for (const auto& r : results) {
      if (key(r) == k) vals.push_back(value(r));
    }
    out.push_back(median(vals));
  }
  return out;
}

void u_shape(Verdict& v, int jobs) {
  SweepSpec sweep;
  sweep.kind = SweepKind::kModelSize;
  sweep.grid = {16, 32, 64, 128, 256, 512};
  sweep.base = spec_from_config(planted_base());
  sweep.seeds = kSeeds;
  sweep.modes = {PeftMode::kFull};
  const auto results = run_experiments(expand_sweep(sweep), jobs);
  std::vector<int> widths(sweep.grid.begin(), sweep.grid.end());
  const auto med = median_by(
      results, widths, [](const ExperimentResult& r) { return r.spec.model.emb_dim; },
      [](const ExperimentResult& r) { return r.record.summary().test_error; });
  const auto best = static_cast<std::size_t>(std::min_element(med.begin(), med.end()) - med.begin());
  v.require(best != 0 && best + 1 != med.size(), "minimum at endpoint d=" + std::to_string(widths[best]));
  v.detail << (v.pass ? "" : "; ") << "median test error by d:";
  for (std::size_t i = 0; i < widths.size(); ++i) v.detail << " " << widths[i] << "=" << fixed(med[i]);
  v.detail << ", minimum at d=" << widths[best];
}

ConfigMap pretrain_base() {
  ConfigMap c = planted_base();
  c["emb"] = "512";
  c["mlp_hidden"] = "1024";
  c["pretrain_epochs"] = "5";
  c["pretrain_graphs"] = "600";
  c["bottleneck"] = "15";
  return c;
}

void adapter_gap(Verdict& v, int jobs) {
  std::vector<ExperimentSpec> specs;
  for (const char* mode : {"full", "adaptergnn"}) {
    for (const auto seed : kSeeds) {
      ConfigMap c = pretrain_base();
      c["mode"] = mode;
      c["seed"] = std::to_string(seed);
      specs.push_back(spec_from_config(c));
    }
  }
  const auto results = run_experiments(specs, jobs);
  const auto med = median_by(
      results, {0, 1}, [](const ExperimentResult& r) { return r.spec.peft.mode == PeftMode::kFull ? 0 : 1; },
      [](const ExperimentResult& r) { return r.record.summary().error_gap; });
  v.require(med[1] < med[0], "adaptergnn gap not below full");
  v.detail << (v.pass ? "" : "; ") << "d=" << specs[0].model.emb_dim << " median gap full "
           << fixed(med[0]) << ", adaptergnn " << fixed(med[1]);
}

void transfer(Verdict& v, int jobs) {
  std::vector<ExperimentSpec> specs;
  for (const char* epochs : {"0", "5"}) {
    for (const auto seed : kSeeds) {
      ConfigMap c = planted_base();
      c["emb"] = "64";
      c["mode"] = "full";
      c["pretrain_epochs"] = epochs;
      c["pretrain_graphs"] = "600";
      c["seed"] = std::to_string(seed);
      specs.push_back(spec_from_config(c));
    }
  }
  const auto results = run_experiments(specs, jobs);
  const auto med = median_by(
      results, {0, 1}, [](const ExperimentResult& r) { return r.spec.pretrain_epochs > 0 ? 1 : 0; },
      [](const ExperimentResult& r) { return r.first_epoch_loss; });
  v.require(med[1] < med[0], "pretrained epoch-1 loss not below scratch");
  v.detail << (v.pass ? "" : "; ") << "median epoch-1 loss scratch " << fixed(med[0])
           << ", pretrained " << fixed(med[1]);
}

// ---------------------------------------------------------------------------

void flops(Verdict& v) {
  ModelConfig m = testing::tiny_model(4, 2);  // h = 8
  PeftConfig a;
  a.mode = PeftMode::kAdapterGnn;
  a.bottleneck = 2;
  const PeftConfig full;
  const FlopsReport at = estimate_flops(m, a, 3, Phase::kTrain);
  const FlopsReport ft = estimate_flops(m, full, 3, Phase::kTrain);
  const FlopsReport ai = estimate_flops(m, a, 3, Phase::kInfer);
  const FlopsReport fi = estimate_flops(m, full, 3, Phase::kInfer);
  // Hand ledger for d=4, h=8, L=2, b=2 and three node rows.
  const std::int64_t adapter_fwd = 48 + 6 + 48 + 84 + 12 + 12;
  v.require(at.per_layer.size() == 2, "layer count");
  if (at.per_layer.size() == 2) {
    v.require(at.per_layer[0].forward == 192 + 24 + 192 + 84 + 2 * adapter_fwd + 12, "adapter l0 fwd");
    v.require(at.per_layer[0].backward == 24 + 24 + 204 + 84 + 2 * (54 + 6 + 108 + 120 + 36) + 12,
              "adapter l0 bwd");
    v.require(at.per_layer[1].forward == 192 + 24 + 192 + 84 + 2 * adapter_fwd, "adapter l1 fwd");
    v.require(at.per_layer[1].backward == 216 + 24 + 204 + 84 + 2 * (102 + 6 + 108 + 120 + 36),
              "adapter l1 bwd");
  }
  v.require(at.total.total() == 4104, "adapter train total " + std::to_string(at.total.total()));
  v.require(ft.total.total() == 2904, "full train total " + std::to_string(ft.total.total()));
  v.require(fi.total.total() == 924, "full infer total " + std::to_string(fi.total.total()));
  v.require(ai.total.total() == 1620, "adapter infer total " + std::to_string(ai.total.total()));
  v.require(ai.total.total() > fi.total.total(), "adapter inference not above full");

  ModelConfig reference;  // d=300, h=600, L=5
  PeftConfig p15 = a;
  p15.bottleneck = 15;
  const auto ref_at = estimate_flops(reference, p15, 1, Phase::kTrain).total.total();
  const auto ref_ft = estimate_flops(reference, full, 1, Phase::kTrain).total.total();
  v.require(ref_at < ref_ft, "adapter training not below full at d=300");
  v.detail << (v.pass ? "" : "; ") << "ledger exact (train 4104 vs 2904, infer " << ai.total.total()
           << " vs " << fi.total.total() << "); d=300 train adaptergnn " << ref_at << " < full "
           << ref_ft;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

void determinism(Verdict& v) {
  const fs::path root = fs::temp_directory_path() / "gnnpeft-acceptance-determinism";
  fs::remove_all(root);
  const std::vector<std::string> tiny{"--graphs", "60", "--min-nodes", "5", "--max-nodes", "10",
                                      "--layers", "2", "--epochs", "3",
                                      "--dropout", "0.2", "--batch-size", "8"};
  auto run = [&](std::vector<std::string> args, const fs::path& out) {
    args.insert(args.end(), tiny.begin(), tiny.end());
    args.push_back("--out");
    args.push_back(out.string());
    std::ostringstream o, e;
    return run_cli(args, o, e);
  };
  for (const char* sub : {"a", "b"}) {
    const fs::path out = root / sub;
    int code = run({"train", "--mode", "full", "--emb", "8", "--seed", "3"}, out);
    code |= run({"train", "--mode", "adaptergnn", "--emb", "8", "--bottleneck", "2",
                 "--allow-random-backbone"},
                out);
    code |= run({"sweep", "--kind", "bottleneck", "--emb", "8", "--bottleneck", "0,2,4", "--seed", "0,1",
                 "--jobs", "2"}, out);
    code |= run({"sweep", "--kind", "model_size", "--emb", "4,8", "--bottleneck", "2", "--seed", "0,1", "--jobs", "1"}, out);
    v.require(code == 0, std::string("commands failed in run ") + sub);
  }
  int compared = 0;
  for (const auto& e : fs::directory_iterator(root / "a")) {
    if (e.path().extension() != ".csv") continue;
    const fs::path twin = root / "b" / e.path().filename();
    v.require(fs::exists(twin) && slurp(e.path()) == slurp(twin),
              e.path().filename().string() + " differs");
    ++compared;
  }
  v.require(compared >= 4, "only " + std::to_string(compared) + " CSVs");
  fs::remove_all(root);
  v.detail << (v.pass ? "" : "; ") << compared << " CSV outputs byte-identical across reruns";
}

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;
  std::function<void(Verdict&)> run;
};

}  // namespace
}  // namespace gnnpeft

int main(int argc, char** argv) {
  using namespace gnnpeft;
  CLI::App app{"gnnpeft acceptance criteria"};
  std::vector<int> only;
  int jobs = 1;
  app.add_option("--only", only, "run only these criteria")->delimiter(',');
  app.add_option("--jobs", jobs, "concurrent runs inside sweeps")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{
      {1, "gradient correctness", 60, gradients},
      {2, "freeze invariance", 120, freeze},
      {3, "init transparency", 0, transparency},
      {4, "lora merge", 0, lora},
      {5, "parameter ratios", 0, ratios},
      {6, "bound calculator", 0, bound_calculator},
      {7, "roc-auc oracle", 0, auc},
      {8, "model-size u-shape", 1800, [&](Verdict& v) { u_shape(v, jobs); }},
      {9, "adapter generalization gap", 1800, [&](Verdict& v) { adapter_gap(v, jobs); }},
      {10, "transfer gain", 0, [&](Verdict& v) { transfer(v, jobs); }},
      {11, "flops ledger", 0, flops},
      {12, "determinism", 0, determinism},
  };
  const std::set<int> selected(only.begin(), only.end());
  bool all = true;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.contains(c.id)) continue;
    Verdict v;
    const auto start = Clock::now();
    try {
      c.run(v);
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
    if (c.limit_seconds > 0) {
      v.require(seconds < c.limit_seconds,
                "runtime " + fixed(seconds, 1) + "s over " + fixed(c.limit_seconds, 0) + "s");
    }
    all = all && v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << " " << std::setw(2) << c.id << " " << c.name
              << ": " << v.detail.str() << " [" << fixed(seconds, 1) << "s";
    if (c.limit_seconds > 0) std::cout << ", limit " << fixed(c.limit_seconds, 0) << "s";
    std::cout << "]" << std::endl;
  }
  return all ? 0 : 1;
}
