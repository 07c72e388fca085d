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
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gnnpeft/config.hpp"
#include "gnnpeft/graph.hpp"
#include "gnnpeft/registry.hpp"
#include "gnnpeft/train.hpp"

namespace gnnpeft {

// ---------------------------------------------------------------------------
// Finite-hypothesis generalization bound
// ---------------------------------------------------------------------------

// Per-parameter log-hypothesis-size constant: ln|H| ~= c * (#parameters),
// c = ln 2 by default (one bit per parameter).
inline constexpr double kLn2 = 0.69314718055994530942;

struct BoundInput {
  double train_error = 0.0;
  double log_hypothesis_size = 0.0;
  double n = 1.0;
  double delta = 0.05;
};

// sqrt((ln|H| + ln(2/delta)) / (2n)). Throws std::domain_error for delta
// outside (0, 1), n < 1 or a negative log size.
double hoeffding_gap(double log_hypothesis_size, double n, double delta);
// train_error + hoeffding_gap(...)
double bound(const BoundInput& input);
double log_hypothesis_from_count(std::int64_t parameter_count, double c = kLn2);
nlohmann::ordered_json bound_report(const BoundInput& input);

// ---------------------------------------------------------------------------
// Parameter counting
// ---------------------------------------------------------------------------

struct GroupCount {
  std::int64_t total = 0;
  std::int64_t trainable = 0;
};

struct ParamCounts {
  std::int64_t total = 0;
  std::int64_t trainable = 0;
  std::map<std::string, GroupCount> by_group;  // backbone, peft, classifier
  double fraction() const {
    return total ? static_cast<double>(trainable) / static_cast<double>(total) : 0.0;
  }
};

// Buffers (BN running statistics) are not parameters and are not counted.
ParamCounts count_params(const ParamRegistry& registry);
nlohmann::ordered_json counts_json(const ParamCounts& counts);

// ---------------------------------------------------------------------------
// FLOPs
// ---------------------------------------------------------------------------

enum class Phase { kTrain, kInfer };

// Cost conventions, per row of the batch. A multiply-add is 2 FLOPs, so a
// linear layer costs 2*B*n_in*n_out forward and the same again for each of its
// input-gradient and weight-gradient products; bias addition is folded into
// the multiply-add count, a bias gradient costs B*n_out. The estimate covers
// the per-node layer stack; message passing, readout and the classifier are
// identical across tuning modes and are left out.
struct FlopsConstants {
  static constexpr std::int64_t kReluForward = 1;
  static constexpr std::int64_t kReluBackward = 1;
  static constexpr std::int64_t kBnTrainForward = 7;  // mean, var, normalize, affine
  static constexpr std::int64_t kBnEvalForward = 4;   // normalize, affine
  static constexpr std::int64_t kBnBackwardInput = 7;
  static constexpr std::int64_t kBnBackwardAffine = 3;
  static constexpr std::int64_t kAddForward = 1;      // element-wise add / bias-vector add
  static constexpr std::int64_t kScaleForward = 1;
  static constexpr std::int64_t kScaleBackwardInput = 1;
  static constexpr std::int64_t kScaleBackwardFactor = 2;
  static constexpr std::int64_t kVectorBackward = 1;  // gradient of an added vector
  static constexpr std::int64_t kMulColsForward = 1;
  static constexpr std::int64_t kMulColsBackwardInput = 1;
  static constexpr std::int64_t kMulColsBackwardWeight = 2;
};

struct FlopsEstimate {
  std::int64_t forward = 0;
  std::int64_t backward = 0;
  std::int64_t total() const { return forward + backward; }
};

struct FlopsReport {
  FlopsEstimate total;
  // One entry per layer, plus the inter-layer activations attributed to the
  // layer that produced them; they sum to `total`.
  std::vector<FlopsEstimate> per_layer;
};

// Analytic count for one batch of `batch_size` node rows. Training runs the
// forward in train mode and a backward that follows the autodiff rule: a
// gradient is formed only for trainable parameters and for activations that
// depend on some trainable parameter.
FlopsReport estimate_flops(const ModelConfig& model, const PeftConfig& peft,
                           std::int64_t batch_size, Phase phase);
FlopsEstimate linear_flops(std::int64_t batch_size, std::int64_t n_in,
                           std::int64_t n_out, Phase phase, bool input_grad,
                           bool weight_grad, bool bias_grad);

// ---------------------------------------------------------------------------
// Experiments and sweeps
// ---------------------------------------------------------------------------

// Everything that determines one training run.
struct ExperimentSpec {
  SyntheticSpec data;
  SplitSpec split;
  ModelConfig model;
  PeftConfig peft;
  TrainConfig train;
  // Fraction of the training split used (prefix of a seeded permutation).
  double data_fraction = 1.0;
  // EdgePred pre-training on a separate unlabeled corpus from the same
  // generator; 0 epochs means a random backbone.
  int pretrain_epochs = 0;
  int pretrain_graphs = 0;

  // Canonical "key=value" lines, sorted by key.
  std::string canonical() const;
  std::string fingerprint() const;
};

// Flat key=value view of an ExperimentSpec; the keys are the config-file keys.
using ConfigMap = std::map<std::string, std::string>;

// Accepted keys, sorted.
const std::vector<std::string>& experiment_keys();
// Missing keys keep their defaults ("mlp_hidden" defaults to 2 * emb). Unknown
// keys and unparsable values raise ConfigError; the result is validated.
ExperimentSpec spec_from_config(const ConfigMap& config);
// Every key, fully resolved.
ConfigMap spec_to_config(const ExperimentSpec& spec);

struct ExperimentResult {
  std::string fingerprint;
  ExperimentSpec spec;
  RunRecord record;
  ParamCounts counts;
  int n_train = 0;
  double first_epoch_loss = 0.0;
};

// The first round(fraction * |train|) graphs of a seeded permutation, kept in
// their original order.
Dataset training_subset(const Dataset& train, double fraction, std::uint64_t seed);

// Splits `source` (or the spec's synthetic dataset when null) and subsamples
// the training part by data_fraction.
DataSplits prepare_data(const ExperimentSpec& spec, const Dataset* source = nullptr);

// EdgePred corpus: the spec's generator with pretrain_graphs graphs and a
// seed drawn from the data seed's "pretrain" stream.
Dataset pretrain_corpus(const ExperimentSpec& spec);

// Generates data, optionally pre-trains, applies the tuning mode and trains.
ExperimentResult run_experiment(const ExperimentSpec& spec);

// Runs specs on `jobs` worker threads; results come back sorted by
// fingerprint. EdgePred backbones are shared between runs that need the same
// pre-training.
std::vector<ExperimentResult> run_experiments(const std::vector<ExperimentSpec>& specs,
                                              int jobs = 1);

enum class SweepKind { kModelSize, kDataSize, kBottleneck, kExpressivity };

std::string_view to_string(SweepKind kind);
SweepKind parse_sweep_kind(std::string_view name);
// Config key carrying the grid for each kind: emb, data_fraction,
// bottleneck, bottleneck.
std::string_view grid_key(SweepKind kind);

struct SweepSpec {
  SweepKind kind = SweepKind::kModelSize;
  std::vector<double> grid;
  ExperimentSpec base;
  std::vector<std::uint64_t> seeds{0};
  // Modes run at every grid point. Empty selects the kind's default:
  // {full, adaptergnn} for model_size, {base mode} for data_size, and
  // {adaptergnn} for bottleneck and expressivity.
  std::vector<PeftMode> modes;
};

// Expands a sweep into concrete runs. Grid values that violate a module
// invariant raise ConfigError before anything runs. Expressivity pairs each
// adapter run over a frozen random backbone with a full run from scratch
// whose width gives the closest trainable-parameter count.
std::vector<ExperimentSpec> expand_sweep(const SweepSpec& sweep);

// Closed-form parameter count of the plain backbone + classifier.
std::int64_t model_param_count(const ModelConfig& model);

// Width of a from-scratch full model whose parameter count is closest to
// `target` (ties go to the smaller width); mlp_hidden follows as 2 * width.
int matched_width(const ModelConfig& base, std::int64_t target);

// Columns: fingerprint,mode,d,b,n_train,seed,train_err,test_err,test_auc,gap,
// trainable_frac. Rows sorted by fingerprint.
std::string sweep_csv(std::vector<ExperimentResult> results);

// ---------------------------------------------------------------------------
// Transfer and overfitting-mitigation gains
// ---------------------------------------------------------------------------

struct GapReport {
  double transfer_gain = 0.0;
  double overfitting_gain = 0.0;
  std::vector<std::string> transfer_runs;
  std::vector<std::string> overfitting_runs;
  int optimal_width = 0;
  int largest_width = 0;
  // Theoretical complexity terms at the two widths (hoeffding_gap with
  // ln|H| = ln2 * trainable count, n = training size, delta = 0.05).
  double theory_gap_optimal = 0.0;
  double theory_gap_largest = 0.0;
  std::string note;
};

double median(std::vector<double> values);

// TG = median over seeds of train_err(scratch) - train_err(pretrained). Runs
// are paired by seed and must agree on everything but initialization.
double transfer_gain(const std::vector<ExperimentResult>& scratch,
                     const std::vector<ExperimentResult>& pretrained,
                     std::vector<std::string>* used = nullptr);

// OG from a from-scratch model-size sweep: (train error + measured gap) of the
// largest width minus that of the width minimizing it, each a median over
// seeds. The measured gap stands in for the O(sqrt(|P|/n)) term.
GapReport overfitting_gain(const std::vector<ExperimentResult>& sweep);

GapReport compute_gaps(const std::vector<ExperimentResult>& scratch,
                       const std::vector<ExperimentResult>& pretrained,
                       const std::vector<ExperimentResult>& size_sweep);
nlohmann::ordered_json gap_report_json(const GapReport& report);

}  // namespace gnnpeft
