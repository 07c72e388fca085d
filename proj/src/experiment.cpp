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

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <future>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "gnnpeft/analysis.hpp"
#include "gnnpeft/errors.hpp"
#include "gnnpeft/gin.hpp"
#include "gnnpeft/peft.hpp"

namespace gnnpeft {

namespace {

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, r.ptr};
}

std::string fmt(int v) { return std::to_string(v); }
std::string fmt(std::uint64_t v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  const auto r = std::from_chars(text.data(), end, value);
  if (r.ec != std::errc() || r.ptr != end || text.empty()) {
    throw ConfigError("key '" + key + "': cannot parse '" + text + "'");
  }
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError("key '" + key + "': expected true or false, got '" + text + "'");
}

// One binding per key: reads the key out of a spec and writes it back.
struct KeyBinding {
  std::function<std::string(const ExperimentSpec&)> get;
  std::function<void(ExperimentSpec&, const std::string& key, const std::string&)> set;
};

template <typename Field>
KeyBinding number_key(std::function<Field&(ExperimentSpec&)> field) {
  return {[field](const ExperimentSpec& s) {
            return fmt(field(const_cast<ExperimentSpec&>(s)));
          },
          [field](ExperimentSpec& s, const std::string& key, const std::string& v) {
            field(s) = parse_number<Field>(key, v);
          }};
}

KeyBinding bool_key(std::function<bool&(ExperimentSpec&)> field) {
  return {[field](const ExperimentSpec& s) {
            return fmt(field(const_cast<ExperimentSpec&>(s)));
          },
          [field](ExperimentSpec& s, const std::string& key, const std::string& v) {
            field(s) = parse_bool(key, v);
          }};
}

const std::map<std::string, KeyBinding>& bindings() {
  static const std::map<std::string, KeyBinding> table = [] {
    std::map<std::string, KeyBinding> t;
    using S = ExperimentSpec;
    t["graphs"] = number_key<int>([](S& s) -> int& { return s.data.n_graphs; });
    t["min_nodes"] = number_key<int>([](S& s) -> int& { return s.data.min_nodes; });
    t["max_nodes"] = number_key<int>([](S& s) -> int& { return s.data.max_nodes; });
    t["edge_prob"] = number_key<double>([](S& s) -> double& { return s.data.edge_prob; });
    t["node_vocab0"] = number_key<int>([](S& s) -> int& { return s.data.vocab.node[0]; });
    t["node_vocab1"] = number_key<int>([](S& s) -> int& { return s.data.vocab.node[1]; });
    t["edge_vocab0"] = number_key<int>([](S& s) -> int& { return s.data.vocab.edge[0]; });
    t["edge_vocab1"] = number_key<int>([](S& s) -> int& { return s.data.vocab.edge[1]; });
    t["tasks"] = number_key<int>([](S& s) -> int& { return s.data.n_tasks; });
    t["missing_rate"] = number_key<double>([](S& s) -> double& { return s.data.missing_rate; });
    t["data_seed"] = number_key<std::uint64_t>([](S& s) -> std::uint64_t& { return s.data.seed; });
    t["split_train"] = number_key<double>([](S& s) -> double& { return s.split.train; });
    t["split_valid"] = number_key<double>([](S& s) -> double& { return s.split.valid; });
    t["split_test"] = number_key<double>([](S& s) -> double& { return s.split.test; });
    t["split_mode"] = {
        [](const S& s) {
          return std::string(s.split.mode == SplitMode::kRandom ? "random" : "structure");
        },
        [](S& s, const std::string& key, const std::string& v) {
          if (v == "random") {
            s.split.mode = SplitMode::kRandom;
          } else if (v == "structure") {
            s.split.mode = SplitMode::kStructure;
          } else {
            throw ConfigError("key '" + key + "': expected random or structure, got '" + v + "'");
          }
        }};
    t["emb"] = number_key<int>([](S& s) -> int& { return s.model.emb_dim; });
    t["layers"] = number_key<int>([](S& s) -> int& { return s.model.num_layers; });
    t["mlp_hidden"] = number_key<int>([](S& s) -> int& { return s.model.mlp_hidden; });
    t["dropout"] = number_key<double>([](S& s) -> double& { return s.model.dropout; });
    t["mode"] = {[](const S& s) { return std::string(to_string(s.peft.mode)); },
                 [](S& s, const std::string&, const std::string& v) {
                   s.peft.mode = parse_peft_mode(v);
                 }};
    t["bottleneck"] = number_key<int>([](S& s) -> int& { return s.peft.bottleneck; });
    t["lora_rank"] = number_key<int>([](S& s) -> int& { return s.peft.lora_rank; });
    t["scaling_init"] = number_key<double>([](S& s) -> double& { return s.peft.scaling_init; });
    t["tune_bias"] = bool_key([](S& s) -> bool& { return s.peft.tune_backbone_bias; });
    t["tune_bn"] = bool_key([](S& s) -> bool& { return s.peft.tune_backbone_bn; });
    t["partial_k"] = number_key<int>([](S& s) -> int& { return s.peft.partial_k; });
    t["epochs"] = number_key<int>([](S& s) -> int& { return s.train.epochs; });
    t["batch_size"] = number_key<int>([](S& s) -> int& { return s.train.batch_size; });
    t["lr"] = number_key<double>([](S& s) -> double& { return s.train.lr; });
    t["weight_decay"] = number_key<double>([](S& s) -> double& { return s.train.weight_decay; });
    t["seed"] = number_key<std::uint64_t>([](S& s) -> std::uint64_t& { return s.train.seed; });
    t["data_fraction"] = number_key<double>([](S& s) -> double& { return s.data_fraction; });
    t["pretrain_epochs"] = number_key<int>([](S& s) -> int& { return s.pretrain_epochs; });
    t["pretrain_graphs"] = number_key<int>([](S& s) -> int& { return s.pretrain_graphs; });
    return t;
  }();
  return table;
}

void validate_spec(const ExperimentSpec& spec) {
  spec.model.validate();
  spec.peft.validate(spec.model);
  spec.train.validate();
  if (spec.model.num_tasks != spec.data.n_tasks) {
    throw ConfigError("model has " + std::to_string(spec.model.num_tasks) +
                      " tasks but the data has " + std::to_string(spec.data.n_tasks));
  }
  if (!(spec.data_fraction > 0.0 && spec.data_fraction <= 1.0)) {
    throw ConfigError("data_fraction must lie in (0, 1], got " + fmt(spec.data_fraction));
  }
  if (spec.pretrain_epochs < 0) throw ConfigError("pretrain_epochs must be non-negative");
  if (spec.pretrain_epochs > 0 && spec.pretrain_graphs < 1) {
    throw ConfigError("pretrain_epochs > 0 needs pretrain_graphs >= 1");
  }
}

}  // namespace

const std::vector<std::string>& experiment_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, b] : bindings()) k.push_back(name);
    return k;
  }();
  return keys;
}

ExperimentSpec spec_from_config(const ConfigMap& config) {
  ExperimentSpec spec;
  const auto& table = bindings();
  for (const auto& [key, value] : config) {
    if (!table.contains(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  for (const auto& [key, value] : config) table.at(key).set(spec, key, value);
  if (!config.contains("mlp_hidden")) spec.model.mlp_hidden = 2 * spec.model.emb_dim;
  spec.model.num_tasks = spec.data.n_tasks;
  spec.model.vocab = spec.data.vocab;
  validate_spec(spec);
  return spec;
}

ConfigMap spec_to_config(const ExperimentSpec& spec) {
  ConfigMap out;
  for (const auto& [key, b] : bindings()) out[key] = b.get(spec);
  return out;
}

std::string ExperimentSpec::canonical() const {
  std::string out;
  for (const auto& [key, value] : spec_to_config(*this)) out += key + "=" + value + "\n";
  return out;
}

std::string ExperimentSpec::fingerprint() const {
  const std::string text = canonical();
  return hex64(Rng::fnv1a(text)).substr(0, 12);
}

// ---------------------------------------------------------------------------

Dataset training_subset(const Dataset& train, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ConfigError("data_fraction must lie in (0, 1], got " + fmt(fraction));
  }
  if (fraction == 1.0) return train;
  const auto keep =
      static_cast<std::size_t>(std::llround(fraction * static_cast<double>(train.size())));
  if (keep == 0) throw ConfigError("data_fraction " + fmt(fraction) + " leaves no training graphs");
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  Rng(seed).split("subsample").shuffle(std::span<std::size_t>(order));
  order.resize(keep);
  std::sort(order.begin(), order.end());
  Dataset subset;
  for (const std::size_t i : order) subset.push_back(train[i]);
  return subset;
}

DataSplits prepare_data(const ExperimentSpec& spec, const Dataset* source) {
  DataSplits splits = source ? split(*source, spec.split, spec.data.seed)
                             : split(generate_synthetic(spec.data), spec.split, spec.data.seed);
  splits.train = training_subset(splits.train, spec.data_fraction, spec.data.seed);
  return splits;
}

Dataset pretrain_corpus(const ExperimentSpec& spec) {
  SyntheticSpec corpus = spec.data;
  corpus.n_graphs = spec.pretrain_graphs;
  corpus.seed = Rng(spec.data.seed).split("pretrain").next_u64();
  return generate_synthetic(corpus);
}

namespace {

struct PretrainCache {
  std::mutex mutex;
  std::map<std::string, std::shared_future<ParamRegistry>> entries;
};

std::string pretrain_key(const ExperimentSpec& spec) {
  ExperimentSpec key;
  key.data = spec.data;
  key.model = spec.model;
  key.train = spec.train;
  key.train.epochs = spec.pretrain_epochs;
  key.pretrain_epochs = spec.pretrain_epochs;
  key.pretrain_graphs = spec.pretrain_graphs;
  return key.canonical();
}

ParamRegistry pretrained_backbone(const ExperimentSpec& spec) {
  TrainConfig config = spec.train;
  config.epochs = spec.pretrain_epochs;
  ParamRegistry reg = init_params(spec.model, spec.train.seed);
  pretrain_edgepred(pretrain_corpus(spec), reg, spec.model, config);
  return reg;
}

ParamRegistry backbone_for(const ExperimentSpec& spec, PretrainCache* cache) {
  if (spec.pretrain_epochs == 0) return init_params(spec.model, spec.train.seed);
  if (cache == nullptr) return pretrained_backbone(spec);
  const std::string key = pretrain_key(spec);
  std::shared_future<ParamRegistry> future;
  std::promise<ParamRegistry> promise;
  bool owner = false;
  {
    std::lock_guard lock(cache->mutex);
    auto it = cache->entries.find(key);
    if (it == cache->entries.end()) {
      future = promise.get_future().share();
      cache->entries.emplace(key, future);
      owner = true;
    } else {
      future = it->second;
    }
  }
  if (owner) {
    try {
      promise.set_value(pretrained_backbone(spec));
    } catch (...) {
      promise.set_exception(std::current_exception());
    }
  }
  return future.get().clone();
}

ExperimentResult run_one(const ExperimentSpec& spec, PretrainCache* cache) {
  validate_spec(spec);
  DataSplits splits = prepare_data(spec);
  const Dataset& train = splits.train;

  ParamRegistry reg = backbone_for(spec, cache);
  if (spec.pretrain_epochs > 0) reset_classifier(reg, spec.model, spec.train.seed);
  apply_peft(reg, spec.model, spec.peft, spec.train.seed);

  ExperimentResult result;
  result.fingerprint = spec.fingerprint();
  result.spec = spec;
  result.counts = count_params(reg);
  result.n_train = static_cast<int>(train.size());
  TrainOptions options;
  options.eval_every_epoch = false;
  result.record = train_supervised(train, splits.test, reg, spec.model, spec.train, options);
  result.record.fingerprint = result.fingerprint;
  result.first_epoch_loss = first_epoch_loss(result.record);
  return result;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) { return run_one(spec, nullptr); }

std::vector<ExperimentResult> run_experiments(const std::vector<ExperimentSpec>& specs,
                                              int jobs) {
  std::vector<ExperimentResult> results(specs.size());
  PretrainCache cache;
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= specs.size()) return;
      {
        std::lock_guard lock(error_mutex);
        if (error) return;
      }
      try {
        results[i] = run_one(specs[i], &cache);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const auto n = static_cast<std::size_t>(std::max(1, jobs));
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < std::min(n, specs.size()); ++t) pool.emplace_back(worker);
    worker();
  }
  if (error) std::rethrow_exception(error);
  std::stable_sort(results.begin(), results.end(),
                   [](const ExperimentResult& a, const ExperimentResult& b) {
                     return a.fingerprint < b.fingerprint;
                   });
  return results;
}

// ---------------------------------------------------------------------------

std::string_view to_string(SweepKind kind) {
  switch (kind) {
    case SweepKind::kModelSize: return "model_size";
    case SweepKind::kDataSize: return "data_size";
    case SweepKind::kBottleneck: return "bottleneck";
    case SweepKind::kExpressivity: return "expressivity";
  }
  return "?";
}

SweepKind parse_sweep_kind(std::string_view name) {
  for (const auto k : {SweepKind::kModelSize, SweepKind::kDataSize, SweepKind::kBottleneck,
                       SweepKind::kExpressivity}) {
    if (to_string(k) == name) return k;
  }
  throw ConfigError("unknown sweep kind '" + std::string(name) +
                    "' (expected model_size, data_size, bottleneck or expressivity)");
}

std::string_view grid_key(SweepKind kind) {
  switch (kind) {
    case SweepKind::kModelSize: return "emb";
    case SweepKind::kDataSize: return "data_fraction";
    case SweepKind::kBottleneck:
    case SweepKind::kExpressivity: return "bottleneck";
  }
  return "?";
}

std::int64_t model_param_count(const ModelConfig& m) {
  const std::int64_t d = m.emb_dim, h = m.mlp_hidden, t = m.num_tasks;
  const std::int64_t encoders =
      d * (m.vocab.node[0] + m.vocab.node[1] + m.vocab.edge[0] + 1 + m.vocab.edge[1] + 1);
  const std::int64_t layer = d * h + h + h * d + d + 2 * d;
  return encoders + m.num_layers * layer + d * t + t;
}

int matched_width(const ModelConfig& base, std::int64_t target) {
  auto count = [&](int w) {
    ModelConfig m = base;
    m.emb_dim = w;
    m.mlp_hidden = 2 * w;
    return model_param_count(m);
  };
  int lo = 1, hi = 1;
  while (count(hi) < target) hi *= 2;
  while (lo < hi) {
    const int mid = lo + (hi - lo) / 2;
    if (count(mid) < target) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  if (lo > 1 && target - count(lo - 1) <= count(lo) - target) return lo - 1;
  return lo;
}

namespace {

int integral_grid_value(double v, SweepKind kind) {
  if (v != std::floor(v) || v < 0 || v > 1e6) {
    throw ConfigError(std::string(grid_key(kind)) + " grid value " + fmt(v) +
                      " is not a non-negative integer");
  }
  return static_cast<int>(v);
}

}  // namespace

std::vector<ExperimentSpec> expand_sweep(const SweepSpec& sweep) {
  if (sweep.grid.empty()) throw ConfigError("sweep grid is empty");
  if (sweep.seeds.empty()) throw ConfigError("sweep needs at least one seed");
  std::vector<PeftMode> modes = sweep.modes;
  if (modes.empty()) {
    switch (sweep.kind) {
      case SweepKind::kModelSize: modes = {PeftMode::kFull, PeftMode::kAdapterGnn}; break;
      case SweepKind::kDataSize: modes = {sweep.base.peft.mode}; break;
      case SweepKind::kBottleneck:
      case SweepKind::kExpressivity: modes = {PeftMode::kAdapterGnn}; break;
    }
  }

  std::vector<ExperimentSpec> out;
  std::set<std::string> seen;
  auto push = [&](ExperimentSpec s) {
    validate_spec(s);
    if (seen.insert(s.canonical()).second) out.push_back(std::move(s));
  };
  for (const double v : sweep.grid) {
    for (const PeftMode mode : modes) {
      for (const std::uint64_t seed : sweep.seeds) {
        ExperimentSpec s = sweep.base;
        s.peft.mode = mode;
        s.train.seed = seed;
        switch (sweep.kind) {
          case SweepKind::kModelSize: {
            const int d = integral_grid_value(v, sweep.kind);
            s.model.emb_dim = d;
            s.model.mlp_hidden = 2 * d;
            break;
          }
          case SweepKind::kDataSize:
            s.data_fraction = v;
            break;
          case SweepKind::kBottleneck:
            s.peft.bottleneck = integral_grid_value(v, sweep.kind);
            break;
          case SweepKind::kExpressivity: {
            s.peft.bottleneck = integral_grid_value(v, sweep.kind);
            s.pretrain_epochs = 0;
            push(s);
            ParamRegistry probe = init_params(s.model, 0);
            apply_peft(probe, s.model, s.peft, 0);
            ExperimentSpec plain = s;
            plain.peft = PeftConfig{};
            plain.peft.mode = PeftMode::kFull;
            plain.model.emb_dim = matched_width(s.model, count_params(probe).trainable);
            plain.model.mlp_hidden = 2 * plain.model.emb_dim;
            push(plain);
            continue;
          }
        }
        push(s);
      }
    }
  }
  return out;
}

std::string sweep_csv(std::vector<ExperimentResult> results) {
  std::stable_sort(results.begin(), results.end(),
                   [](const ExperimentResult& a, const ExperimentResult& b) {
                     return a.fingerprint < b.fingerprint;
                   });
  auto num = [](double v) {
    if (std::isnan(v)) return std::string("nan");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  std::ostringstream os;
  os << "fingerprint,mode,d,b,n_train,seed,train_err,test_err,test_auc,gap,trainable_frac\n";
  for (const auto& r : results) {
    const auto s = r.record.summary();
    const PeftMode mode = r.spec.peft.mode;
    const bool adapters = mode == PeftMode::kAdapterGnn || mode == PeftMode::kAdapterSeq ||
                          mode == PeftMode::kAdapterPar;
    os << r.fingerprint << ',' << to_string(mode) << ',' << r.spec.model.emb_dim << ','
       << (adapters ? r.spec.peft.bottleneck : 0) << ',' << r.n_train << ','
       << r.spec.train.seed << ',' << num(s.train_error) << ',' << num(s.test_error) << ','
       << num(s.test_auc) << ',' << num(s.gap) << ',' << num(r.counts.fraction()) << '\n';
  }
  return os.str();
}

// ---------------------------------------------------------------------------

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double transfer_gain(const std::vector<ExperimentResult>& scratch,
                     const std::vector<ExperimentResult>& pretrained,
                     std::vector<std::string>* used) {
  if (scratch.empty() || scratch.size() != pretrained.size()) {
    throw PairingError("transfer gain needs equally many scratch and pretrained runs");
  }
  auto stripped = [](ExperimentSpec s) {
    s.pretrain_epochs = 0;
    s.pretrain_graphs = 0;
    return s.canonical();
  };
  std::map<std::uint64_t, const ExperimentResult*> by_seed;
  for (const auto& r : pretrained) {
    if (!by_seed.emplace(r.spec.train.seed, &r).second) {
      throw PairingError("duplicate seed " + std::to_string(r.spec.train.seed));
    }
  }
  std::vector<double> diffs;
  for (const auto& s : scratch) {
    const auto it = by_seed.find(s.spec.train.seed);
    if (it == by_seed.end()) {
      throw PairingError("no pretrained run for seed " + std::to_string(s.spec.train.seed));
    }
    if (stripped(s.spec) != stripped(it->second->spec)) {
      throw PairingError("runs " + s.fingerprint + " and " + it->second->fingerprint +
                         " differ in more than initialization");
    }
    diffs.push_back(s.record.summary().train_error - it->second->record.summary().train_error);
    if (used) {
      used->push_back(s.fingerprint);
      used->push_back(it->second->fingerprint);
    }
  }
  return median(diffs);
}

GapReport overfitting_gain(const std::vector<ExperimentResult>& sweep) {
  if (sweep.empty()) throw PairingError("overfitting gain needs a model-size sweep");
  std::map<int, std::vector<const ExperimentResult*>> by_width;
  for (const auto& r : sweep) {
    if (r.spec.peft.mode != PeftMode::kFull || r.spec.pretrain_epochs != 0) {
      throw PairingError("run " + r.fingerprint + " is not a from-scratch full run");
    }
    by_width[r.spec.model.emb_dim].push_back(&r);
  }
  GapReport report;
  std::map<int, double> objective;
  for (const auto& [width, runs] : by_width) {
    std::vector<double> v;
    for (const auto* r : runs) {
      const auto s = r->record.summary();
      v.push_back(s.train_error + s.error_gap);
      report.overfitting_runs.push_back(r->fingerprint);
    }
    objective[width] = median(v);
  }
  report.largest_width = objective.rbegin()->first;
  report.optimal_width = objective.begin()->first;
  for (const auto& [width, value] : objective) {
    if (value < objective[report.optimal_width]) report.optimal_width = width;
  }
  report.overfitting_gain = objective[report.largest_width] - objective[report.optimal_width];
  auto theory = [&](int width) {
    const auto* r = by_width[width].front();
    return hoeffding_gap(log_hypothesis_from_count(r->counts.trainable),
                         static_cast<double>(r->n_train), 0.05);
  };
  report.theory_gap_optimal = theory(report.optimal_width);
  report.theory_gap_largest = theory(report.largest_width);
  report.note =
      "train error is 1 - train AUC; the measured gap (test error - train error) replaces "
      "the O(sqrt(|P|/n)) term";
  return report;
}

GapReport compute_gaps(const std::vector<ExperimentResult>& scratch,
                       const std::vector<ExperimentResult>& pretrained,
                       const std::vector<ExperimentResult>& size_sweep) {
  GapReport report = overfitting_gain(size_sweep);
  report.transfer_gain = transfer_gain(scratch, pretrained, &report.transfer_runs);
  return report;
}

nlohmann::ordered_json gap_report_json(const GapReport& report) {
  nlohmann::ordered_json j;
  j["transfer_gain"] = report.transfer_gain;
  j["overfitting_gain"] = report.overfitting_gain;
  j["optimal_width"] = report.optimal_width;
  j["largest_width"] = report.largest_width;
  j["theory_gap_optimal"] = report.theory_gap_optimal;
  j["theory_gap_largest"] = report.theory_gap_largest;
  j["transfer_runs"] = report.transfer_runs;
  j["overfitting_runs"] = report.overfitting_runs;
  j["note"] = report.note;
  return j;
}

}  // namespace gnnpeft
