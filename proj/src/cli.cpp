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

#include "gnnpeft/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "gnnpeft/errors.hpp"
#include "gnnpeft/gin.hpp"
#include "gnnpeft/peft.hpp"

namespace gnnpeft {

namespace fs = std::filesystem;

namespace {

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// Shortest round-trip text, always with a decimal point or exponent.
std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, r.ptr);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string short_hash(std::string_view text) { return hex64(Rng::fnv1a(text)).substr(0, 12); }

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << content;
  if (!os) throw std::runtime_error("write failed for " + path.string());
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto comma = value.find(',', start);
    out.push_back(trim(std::string_view(value).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

nlohmann::ordered_json config_json(const ConfigMap& config) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [k, v] : config) j[k] = v;
  return j;
}

ConfigMap config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw CheckpointError("checkpoint meta has no config");
  ConfigMap out;
  for (const auto& [k, v] : j.items()) out[k] = v.get<std::string>();
  return out;
}

// Options shared by every subcommand plus one option per experiment key.
struct Invocation {
  std::string config_path;
  std::string out_dir = "out";
  bool force = false;
  bool csv = false;
  ConfigMap flags;

  void attach(CLI::App* app, bool experiment_keys_too = true) {
    app->add_option("--config", config_path, "key=value config file");
    app->add_option("--out", out_dir, "output directory")->capture_default_str();
    app->add_flag("--force", force, "overwrite existing run outputs");
    app->add_flag("--csv", csv, "print CSV to stdout");
    if (!experiment_keys_too) return;
    for (const auto& key : experiment_keys()) {
      std::string names = "--" + key;
      std::string dashed = key;
      std::replace(dashed.begin(), dashed.end(), '_', '-');
      if (dashed != key) names += ",--" + dashed;
      app->add_option_function<std::string>(
          names, [this, key](const std::string& v) { flags[key] = v; }, "config key " + key);
    }
  }

  ConfigMap merged() const {
    ConfigMap m;
    if (!config_path.empty()) m = load_config(config_path);
    for (const auto& [k, v] : flags) m[k] = v;
    return m;
  }

  fs::path out(const std::string& name) const { return fs::path(out_dir) / name; }

  void claim(const fs::path& path) const {
    if (!force && fs::exists(path)) {
      throw UsageError(path.string() + " already exists; pass --force to overwrite");
    }
    fs::create_directories(out_dir);
  }
};

ExperimentSpec single_spec(const ConfigMap& config) {
  for (const auto& [k, v] : config) {
    if (v.find(',') != std::string::npos) {
      throw UsageError("key '" + k + "' has a list value; lists are only valid for sweep");
    }
  }
  return spec_from_config(config);
}

std::string run_fingerprint(const ExperimentSpec& spec, const std::vector<std::string>& extra) {
  if (extra.empty()) return spec.fingerprint();
  std::string text = spec.canonical();
  for (const auto& e : extra) text += e + "\n";
  return short_hash(text);
}

// ---------------------------------------------------------------------------

int cmd_gen_data(const Invocation& inv, std::ostream& out) {
  ConfigMap config = inv.merged();
  if (inv.flags.contains("seed")) config["data_seed"] = inv.flags.at("seed");
  const ExperimentSpec spec = single_spec(config);
  const Dataset data = generate_synthetic(spec.data);
  std::ostringstream os;
  write_jsonl(os, data);
  const std::string body = os.str();
  const std::string fp = short_hash(body);
  const fs::path path = inv.out("data-" + fp + ".jsonl");
  inv.claim(path);
  write_file(path, body);
  write_file(inv.out("config-" + fp + ".txt"), config_text(config));
  int positives = 0, missing = 0;
  for (const auto& g : data) {
    for (const int y : g.labels) {
      positives += y == 1;
      missing += y == kMissingLabel;
    }
  }
  if (inv.csv) {
    out << "path,graphs,positive_labels,missing_labels\n"
        << path.string() << ',' << data.size() << ',' << positives << ',' << missing << '\n';
  } else {
    out << "wrote " << path.string() << "\n"
        << "graphs " << data.size() << "\npositive_labels " << positives
        << "\nmissing_labels " << missing << "\n";
  }
  return kExitOk;
}

int cmd_pretrain(const Invocation& inv, const std::string& data_path, std::ostream& out) {
  const ConfigMap config = inv.merged();
  const ExperimentSpec spec = single_spec(config);
  std::vector<std::string> extra;
  Dataset data;
  if (!data_path.empty()) {
    data = load_jsonl(data_path, spec.data.vocab);
    extra.push_back("data=" + hex64(file_hash(data_path)));
  } else if (spec.pretrain_graphs > 0) {
    data = pretrain_corpus(spec);
  } else {
    data = generate_synthetic(spec.data);
  }
  TrainConfig train = spec.train;
  if (spec.pretrain_epochs > 0) train.epochs = spec.pretrain_epochs;
  const std::string fp = run_fingerprint(spec, extra);
  const fs::path ckpt = inv.out("backbone-" + fp + ".ckpt");
  inv.claim(ckpt);

  ParamRegistry reg = init_params(spec.model, spec.train.seed);
  const PretrainRecord record = pretrain_edgepred(data, reg, spec.model, train);
  std::string csv = "epoch,loss\n";
  for (std::size_t e = 0; e < record.epoch_loss.size(); ++e) {
    csv += std::to_string(e + 1) + "," + num(record.epoch_loss[e]) + "\n";
  }
  nlohmann::json meta;
  meta["kind"] = "backbone";
  meta["fingerprint"] = fp;
  meta["config"] = config_json(spec_to_config(spec));
  save_checkpoint(ckpt, reg, meta);
  write_file(inv.out("pretrain-" + fp + ".csv"), csv);
  write_file(inv.out("config-" + fp + ".txt"), config_text(config));
  if (inv.csv) {
    out << csv;
  } else {
    out << "wrote " << ckpt.string() << "\nfinal_loss "
        << num(record.epoch_loss.empty() ? 0.0 : record.epoch_loss.back()) << "\n";
  }
  return kExitOk;
}

struct TrainFlags {
  std::string data_path;
  std::string backbone;
  bool allow_random = false;
};

int cmd_train(const Invocation& inv, const TrainFlags& tf, std::ostream& out) {
  const ConfigMap config = inv.merged();
  if (!config.contains("mode")) {
    throw UsageError("train needs --mode (one of full, adaptergnn, adapter_seq, adapter_par, "
                     "lora, bitfit, ia3, prompt_feat, prompt_node, partial_k)");
  }
  const ExperimentSpec spec = single_spec(config);
  if (spec.peft.mode != PeftMode::kFull && tf.backbone.empty() && !tf.allow_random) {
    throw UsageError("mode " + std::string(to_string(spec.peft.mode)) +
                     " tunes a frozen backbone: pass --backbone-ckpt, or "
                     "--allow-random-backbone to tune over a random one");
  }
  std::vector<std::string> extra;
  std::optional<Dataset> source;
  if (!tf.data_path.empty()) {
    source = load_jsonl(tf.data_path, spec.data.vocab);
    extra.push_back("data=" + hex64(file_hash(tf.data_path)));
  }
  std::string backbone_hash;
  if (!tf.backbone.empty()) {
    backbone_hash = hex64(file_hash(tf.backbone));
    extra.push_back("backbone=" + backbone_hash);
  }
  const std::string fp = run_fingerprint(spec, extra);
  const fs::path csv_path = inv.out("run-" + fp + ".csv");
  inv.claim(csv_path);

  const DataSplits splits = prepare_data(spec, source ? &*source : nullptr);
  ParamRegistry reg = init_params(spec.model, spec.train.seed);
  if (!tf.backbone.empty()) overlay(reg, load_checkpoint(tf.backbone).registry);
  apply_peft(reg, spec.model, spec.peft, spec.train.seed);
  const ParamCounts counts = count_params(reg);
  RunRecord record = train_supervised(splits.train, splits.test, reg, spec.model, spec.train);
  record.fingerprint = fp;

  const std::string csv = run_record_csv(record);
  nlohmann::ordered_json summary;
  summary["fingerprint"] = fp;
  summary["mode"] = std::string(to_string(spec.peft.mode));
  summary["backbone_hash"] = backbone_hash;
  summary["n_train"] = splits.train.size();
  summary["n_test"] = splits.test.size();
  summary["summary"] = run_summary_json(record);
  summary["params"] = counts_json(counts);
  summary["note"] = "errors are 1 - ROC-AUC";

  nlohmann::json meta;
  meta["kind"] = "run";
  meta["fingerprint"] = fp;
  meta["backbone_hash"] = backbone_hash;
  meta["config"] = config_json(spec_to_config(spec));
  const PeftMode mode = spec.peft.mode;
  save_checkpoint(inv.out("model-" + fp + ".ckpt"), reg, meta,
                  [mode](const std::string& name, const ParamEntry& e) {
                    return is_tuned_entry(name, e, mode);
                  });
  write_file(csv_path, csv);
  write_file(inv.out("run-" + fp + ".json"), summary.dump(2) + "\n");
  write_file(inv.out("config-" + fp + ".txt"), config_text(config));

  if (inv.csv) {
    out << csv;
  } else {
    const auto s = record.summary();
    out << "run " << fp << "\n"
        << "trainable " << counts.trainable << " / " << counts.total << "\n"
        << "train_loss " << num(s.train_loss) << "\ntrain_auc " << num(s.train_auc)
        << "\ntest_auc " << num(s.test_auc) << "\ngap " << num(s.gap) << "\n";
  }
  return kExitOk;
}

int cmd_eval(const Invocation& inv, const std::string& ckpt, const TrainFlags& tf,
             std::ostream& out) {
  if (ckpt.empty()) throw UsageError("eval needs --ckpt");
  const LoadedCheckpoint loaded = load_checkpoint(ckpt);
  if (!loaded.meta.contains("config")) throw CheckpointError(ckpt + " carries no config");
  const ExperimentSpec spec = spec_from_config(config_from_json(loaded.meta["config"]));
  const std::string want = loaded.meta.value("backbone_hash", std::string());

  ParamRegistry reg = init_params(spec.model, spec.train.seed);
  if (!want.empty()) {
    if (tf.backbone.empty()) {
      throw UsageError("checkpoint was tuned over backbone " + want + "; pass --backbone-ckpt");
    }
    const std::string got = hex64(file_hash(tf.backbone));
    if (got != want) {
      throw CheckpointError("backbone hash " + got + " does not match the recorded " + want);
    }
    overlay(reg, load_checkpoint(tf.backbone).registry);
  }
  if (loaded.meta.value("kind", std::string()) == "run") {
    apply_peft(reg, spec.model, spec.peft, spec.train.seed);
  }
  overlay(reg, loaded.registry);

  Dataset data;
  std::string data_id;
  if (!tf.data_path.empty()) {
    data = load_jsonl(tf.data_path, spec.data.vocab);
    data_id = hex64(file_hash(tf.data_path));
  } else {
    data = prepare_data(spec).test;
    data_id = "test-split";
  }
  const double auc = evaluate_auc(reg, spec.model, data);
  const std::string fp = short_hash(hex64(file_hash(ckpt)) + "\n" + data_id + "\n");
  nlohmann::ordered_json j;
  j["checkpoint"] = ckpt;
  j["data"] = data_id;
  j["graphs"] = data.size();
  j["auc"] = std::isnan(auc) ? nlohmann::ordered_json() : nlohmann::ordered_json(auc);
  write_file(inv.out("eval-" + fp + ".json"), j.dump(2) + "\n");
  if (inv.csv) {
    out << "graphs,auc\n" << data.size() << ',' << num(auc) << '\n';
  } else {
    out << "graphs " << data.size() << "\nauc " << num(auc) << "\n";
  }
  return kExitOk;
}

struct SweepFlags {
  std::string kind;
  int jobs = 1;
  bool yes = false;
};

int cmd_sweep(const Invocation& inv, const SweepFlags& sf, std::ostream& out,
              std::ostream& err) {
  if (sf.kind.empty()) throw UsageError("sweep needs --kind");
  const SweepKind kind = parse_sweep_kind(sf.kind);
  const ConfigMap config = inv.merged();
  const std::string gkey(grid_key(kind));

  SweepSpec proto;
  proto.kind = kind;
  std::vector<ConfigMap> bases{ConfigMap{}};
  for (const auto& [key, value] : config) {
    const auto values = split_list(value);
    if (key == gkey) {
      for (const auto& v : values) {
        try {
          std::size_t pos = 0;
          proto.grid.push_back(std::stod(v, &pos));
          if (pos != v.size()) throw std::invalid_argument(v);
        } catch (const std::logic_error&) {
          throw ConfigError("grid value '" + v + "' for " + gkey + " is not a number");
        }
      }
    } else if (key == "seed") {
      proto.seeds.clear();
      for (const auto& v : values) {
        std::uint64_t s = 0;
        const auto r = std::from_chars(v.data(), v.data() + v.size(), s);
        if (r.ec != std::errc() || r.ptr != v.data() + v.size()) {
          throw ConfigError("seed '" + v + "' is not a non-negative integer");
        }
        proto.seeds.push_back(s);
      }
    } else if (key == "mode") {
      for (const auto& v : values) proto.modes.push_back(parse_peft_mode(v));
    } else {
      std::vector<ConfigMap> next;
      for (const auto& b : bases) {
        for (const auto& v : values) {
          ConfigMap m = b;
          m[key] = v;
          next.push_back(std::move(m));
        }
      }
      bases = std::move(next);
    }
  }
  if (proto.grid.empty()) throw UsageError("sweep --kind " + sf.kind + " needs a list for " + gkey);

  std::vector<ExperimentSpec> specs;
  std::set<std::string> seen;
  for (const auto& b : bases) {
    SweepSpec sweep = proto;
    ConfigMap base = b;
    if (kind == SweepKind::kModelSize) base.erase("mlp_hidden");
    sweep.base = spec_from_config(base);
    for (auto& s : expand_sweep(sweep)) {
      if (seen.insert(s.fingerprint()).second) specs.push_back(std::move(s));
    }
  }
  err << "sweep " << sf.kind << ": " << specs.size() << " runs\n";
  if (specs.size() > 50 && !sf.yes) {
    throw UsageError("sweep of " + std::to_string(specs.size()) +
                     " runs exceeds 50; pass --yes to confirm");
  }
  std::string ids;
  for (const auto& fp : seen) ids += fp + "\n";
  const std::string fp = short_hash(std::string(to_string(kind)) + "\n" + ids);
  const fs::path csv_path = inv.out("sweep-" + sf.kind + "-" + fp + ".csv");
  inv.claim(csv_path);

  const auto results = run_experiments(specs, sf.jobs);
  const std::string csv = sweep_csv(results);
  write_file(csv_path, csv);
  write_file(inv.out("config-" + fp + ".txt"), config_text(config));

  std::optional<GapReport> og;
  if (kind == SweepKind::kModelSize) {
    std::vector<ExperimentResult> scratch;
    for (const auto& r : results) {
      if (r.spec.peft.mode == PeftMode::kFull && r.spec.pretrain_epochs == 0) scratch.push_back(r);
    }
    if (!scratch.empty()) {
      og = overfitting_gain(scratch);
      write_file(inv.out("gaps-" + fp + ".json"), gap_report_json(*og).dump(2) + "\n");
    }
  }
  if (inv.csv) {
    out << csv;
  } else {
    out << "wrote " << csv_path.string() << "\n";
    if (og) {
      out << "overfitting_gain " << num(og->overfitting_gain) << "\noptimal_width "
          << og->optimal_width << "\nlargest_width " << og->largest_width << "\n";
    }
  }
  return kExitOk;
}

ParamRegistry registry_for(const ExperimentSpec& spec) {
  ParamRegistry reg = init_params(spec.model, spec.train.seed);
  apply_peft(reg, spec.model, spec.peft, spec.train.seed);
  return reg;
}

int cmd_count_params(const Invocation& inv, std::ostream& out) {
  const ConfigMap config = inv.merged();
  const ExperimentSpec spec = single_spec(config);
  const ParamCounts counts = count_params(registry_for(spec));
  nlohmann::ordered_json j = counts_json(counts);
  j["mode"] = std::string(to_string(spec.peft.mode));
  write_file(inv.out("counts-" + spec.fingerprint() + ".json"), j.dump(2) + "\n");
  if (inv.csv) {
    out << "group,total,trainable\n";
    for (const auto& [name, g] : counts.by_group) {
      out << name << ',' << g.total << ',' << g.trainable << '\n';
    }
    out << "all," << counts.total << ',' << counts.trainable << '\n';
  } else {
    out << "mode " << to_string(spec.peft.mode) << "\ntotal " << counts.total << "\ntrainable "
        << counts.trainable << "\nfraction " << num(counts.fraction()) << "\n";
    for (const auto& [name, g] : counts.by_group) {
      out << name << " " << g.trainable << " / " << g.total << "\n";
    }
  }
  return kExitOk;
}

int cmd_flops(const Invocation& inv, std::int64_t rows, std::ostream& out) {
  const ConfigMap config = inv.merged();
  const ExperimentSpec spec = single_spec(config);
  if (rows < 1) throw UsageError("--rows must be at least 1");
  struct Variant {
    std::string name;
    PeftConfig peft;
  };
  std::vector<Variant> variants{{std::string(to_string(spec.peft.mode)), spec.peft}};
  if (spec.peft.mode == PeftMode::kAdapterGnn) {
    PeftConfig other = spec.peft;
    other.tune_backbone_bias = !other.tune_backbone_bias;
    variants[0].name += spec.peft.tune_backbone_bias ? "+bias" : "-bias";
    variants.push_back({"adaptergnn" + std::string(other.tune_backbone_bias ? "+bias" : "-bias"),
                        other});
  }
  if (spec.peft.mode != PeftMode::kFull) variants.push_back({"full", PeftConfig{}});

  nlohmann::ordered_json j;
  j["rows"] = rows;
  j["convention"] =
      "multiply-add = 2 FLOPs; relu 1, bn train 7 / eval 4 / backward 7 + 3 affine, add 1, "
      "scale 1 / backward 1 + 2 per row element";
  std::ostringstream csv;
  csv << "variant,phase,forward,backward,total\n";
  std::ostringstream text;
  for (const auto& v : variants) {
    for (const Phase phase : {Phase::kTrain, Phase::kInfer}) {
      const auto report = estimate_flops(spec.model, v.peft, rows, phase);
      const char* pname = phase == Phase::kTrain ? "train" : "infer";
      j["variants"][v.name][pname] = {{"forward", report.total.forward},
                                      {"backward", report.total.backward},
                                      {"total", report.total.total()}};
      csv << v.name << ',' << pname << ',' << report.total.forward << ','
          << report.total.backward << ',' << report.total.total() << '\n';
      text << v.name << " " << pname << " forward " << report.total.forward << " backward "
           << report.total.backward << " total " << report.total.total() << "\n";
    }
  }
  write_file(inv.out("flops-" + short_hash(spec.canonical() + std::to_string(rows)) + ".json"),
             j.dump(2) + "\n");
  out << (inv.csv ? csv.str() : text.str());
  return kExitOk;
}

struct BoundFlags {
  std::optional<double> log_h;
  std::optional<std::int64_t> params;
  double bits = kLn2;
  std::optional<double> n;
  std::optional<double> delta;
  double train_error = 0.0;
};

int cmd_bound(const Invocation& inv, const BoundFlags& bf, std::ostream& out) {
  if (bf.log_h.has_value() == bf.params.has_value()) {
    throw UsageError("bound needs exactly one of --logH and --params");
  }
  if (!bf.n || !bf.delta) throw UsageError("bound needs --n and --delta");
  BoundInput input;
  input.train_error = bf.train_error;
  input.log_hypothesis_size = bf.log_h ? *bf.log_h : log_hypothesis_from_count(*bf.params, bf.bits);
  input.n = *bf.n;
  input.delta = *bf.delta;
  nlohmann::ordered_json report;
  try {
    report = bound_report(input);
  } catch (const std::domain_error& e) {
    throw UsageError(e.what());
  }
  const double gap = report["gap"].get<double>();
  const double b = report["bound"].get<double>();
  const std::string key = num(input.train_error) + "," + num(input.log_hypothesis_size) + "," +
                          num(input.n) + "," + num(input.delta);
  write_file(inv.out("bound-" + short_hash(key) + ".json"), report.dump(2) + "\n");
  if (inv.csv) {
    out << "train_error,log_hypothesis_size,n,delta,gap,bound\n"
        << key << ',' << num(gap) << ',' << num(b) << '\n';
  } else {
    out << "gap " << num(gap) << "\nbound " << num(b) << "\n";
  }
  return kExitOk;
}

}  // namespace

ConfigMap parse_config(std::istream& is) {
  ConfigMap out;
  const auto& keys = experiment_keys();
  std::string line;
  int number = 0;
  while (std::getline(is, line)) {
    ++number;
    const auto hash = line.find('#');
    const std::string body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(number) + ": expected key=value");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (!std::binary_search(keys.begin(), keys.end(), key)) {
      throw ConfigError("config line " + std::to_string(number) + ": unknown key '" + key + "'");
    }
    if (value.empty()) {
      throw ConfigError("config line " + std::to_string(number) + ": empty value for '" + key + "'");
    }
    if (!out.emplace(key, value).second) {
      throw ConfigError("config line " + std::to_string(number) + ": repeated key '" + key + "'");
    }
  }
  return out;
}

ConfigMap load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path);
  return parse_config(is);
}

std::string config_text(const ConfigMap& config) {
  std::string out;
  for (const auto& [k, v] : config) out += k + "=" + v + "\n";
  return out;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Toy GNN stack with adapter-based parameter-efficient tuning", "gnnpeft"};
  app.require_subcommand(1);

  Invocation gen, pre, trn, evl, swp, cnt, flp, bnd;
  TrainFlags pre_flags, trn_flags, evl_flags;
  SweepFlags sweep_flags;
  BoundFlags bound_flags;
  std::string ckpt;
  std::int64_t rows = 0;

  auto* c_gen = app.add_subcommand("gen-data", "generate a synthetic JSONL dataset");
  gen.attach(c_gen);
  auto* c_pre = app.add_subcommand("pretrain", "EdgePred pre-training of a backbone");
  pre.attach(c_pre);
  c_pre->add_option("--data", pre_flags.data_path, "JSONL dataset (default: synthetic)");
  auto* c_trn = app.add_subcommand("train", "supervised fine-tuning in one tuning mode");
  trn.attach(c_trn);
  c_trn->add_option("--data", trn_flags.data_path, "JSONL dataset (default: synthetic)");
  c_trn->add_option("--backbone-ckpt", trn_flags.backbone, "pre-trained backbone checkpoint");
  c_trn->add_flag("--allow-random-backbone", trn_flags.allow_random,
                  "tune over a randomly initialized backbone");
  auto* c_evl = app.add_subcommand("eval", "ROC-AUC of a trained checkpoint");
  evl.attach(c_evl, false);
  c_evl->add_option("--ckpt", ckpt, "checkpoint written by train");
  c_evl->add_option("--data", evl_flags.data_path, "JSONL dataset (default: the test split)");
  c_evl->add_option("--backbone-ckpt", evl_flags.backbone, "backbone the run was tuned over");
  auto* c_swp = app.add_subcommand("sweep", "run a grid of experiments");
  swp.attach(c_swp);
  c_swp->add_option("--kind", sweep_flags.kind, "model_size, data_size, bottleneck, expressivity");
  c_swp->add_option("--jobs", sweep_flags.jobs, "concurrent runs")->check(CLI::PositiveNumber);
  c_swp->add_flag("--yes", sweep_flags.yes, "confirm sweeps above 50 runs");
  auto* c_cnt = app.add_subcommand("count-params", "parameter counts by group");
  cnt.attach(c_cnt);
  auto* c_flp = app.add_subcommand("flops", "analytic FLOPs for one batch");
  flp.attach(c_flp);
  c_flp->add_option("--rows", rows, "node rows per batch (default: batch_size)");
  auto* c_bnd = app.add_subcommand("bound", "finite-hypothesis generalization bound");
  bnd.attach(c_bnd, false);
  c_bnd->add_option("--logH", bound_flags.log_h, "ln of the hypothesis-space size");
  c_bnd->add_option("--params", bound_flags.params, "parameter count (ln|H| = c * count)");
  c_bnd->add_option("--bits-per-param", bound_flags.bits, "c, default ln 2");
  c_bnd->add_option("--n", bound_flags.n, "training-set size");
  c_bnd->add_option("--delta", bound_flags.delta, "failure probability");
  c_bnd->add_option("--train-error", bound_flags.train_error, "empirical error");

  std::vector<const char*> argv{"gnnpeft"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    if (!app.get_subcommands().empty() && app.get_subcommands().front()->count_all() > 0) {
      err << "error: " << e.what() << "\n";
    } else {
      err << "error: " << e.what() << "\n" << app.help();
    }
    return kExitUsage;
  }

  try {
    if (c_gen->parsed()) return cmd_gen_data(gen, out);
    if (c_pre->parsed()) return cmd_pretrain(pre, pre_flags.data_path, out);
    if (c_trn->parsed()) return cmd_train(trn, trn_flags, out);
    if (c_evl->parsed()) return cmd_eval(evl, ckpt, evl_flags, out);
    if (c_swp->parsed()) return cmd_sweep(swp, sweep_flags, out, err);
    if (c_cnt->parsed()) return cmd_count_params(cnt, out);
    if (c_flp->parsed()) {
      if (rows == 0) rows = single_spec(flp.merged()).train.batch_size;
      return cmd_flops(flp, rows, out);
    }
    if (c_bnd->parsed()) return cmd_bound(bnd, bound_flags, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "failed: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace gnnpeft
