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
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gnnpeft/config.hpp"
#include "gnnpeft/graph.hpp"
#include "gnnpeft/registry.hpp"

namespace gnnpeft {

// Adam over the trainable entries of a registry; frozen entries are never
// touched. With weight_decay > 0 the decay is added to the gradient.
class Adam {
 public:
  explicit Adam(const TrainConfig& config);
  void step(ParamRegistry& registry);
  int steps() const { return t_; }

 private:
  struct Moments {
    std::vector<double> m, v;
  };
  TrainConfig config_;
  int t_ = 0;
  std::map<std::string, Moments, std::less<>> state_;
};

// Pairwise ROC-AUC: (#correctly ordered pairs + 0.5 * #ties) / #pairs.
// Labels are 0/1. Throws MetricUndefinedError without both classes.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

// Unweighted mean over tasks that have both classes among unmasked entries.
// scores, labels and mask are G x T. Throws MetricUndefinedError when no task
// qualifies.
double roc_auc(const Tensor& scores, const Tensor& labels, const Tensor& mask);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double train_auc = 0.0;
  double test_auc = 0.0;
  double gap() const { return train_auc - test_auc; }
};

struct RunSummary {
  double train_loss = 0.0;
  double train_auc = 0.0;
  double test_auc = 0.0;
  // 1 - AUC; stands in for a 0-1 error, which ranking metrics do not have.
  double train_error = 0.0;
  double test_error = 0.0;
  // train AUC - test AUC
  double gap = 0.0;
  // test error - train error
  double error_gap = 0.0;
};

struct RunRecord {
  std::vector<EpochRecord> epochs;
  std::string fingerprint;
  RunSummary summary() const;
};

// AUC-based generalization gap at the final epoch.
double generalization_gap(const RunRecord& record);

// CSV columns: epoch,train_loss,train_auc,test_auc,gap
std::string run_record_csv(const RunRecord& record);
nlohmann::ordered_json run_summary_json(const RunRecord& record);

// Eval-mode logits for a dataset, in order (G x T).
Tensor predict(const ParamRegistry& registry, const ModelConfig& config,
               const Dataset& data, int batch_size = 256);
// Eval-mode multi-task ROC-AUC; NaN when undefined for this dataset.
double evaluate_auc(const ParamRegistry& registry, const ModelConfig& config,
                    const Dataset& data, int batch_size = 256);

struct TrainOptions {
  // Evaluate train/test AUC after every epoch; otherwise only after the last.
  bool eval_every_epoch = true;
  // Called after every epoch with the registry (test hook).
  std::function<void(int epoch, const ParamRegistry&)> on_epoch;
};

// Minibatch Adam on masked BCE. The registry must already carry the flags
// set by apply_peft. Throws DivergenceError on a non-finite loss.
RunRecord train_supervised(const Dataset& train, const Dataset& test,
                           ParamRegistry& registry, const ModelConfig& model,
                           const TrainConfig& config,
                           const TrainOptions& options = {});

struct EdgePredOptions {
  double hide_fraction = 0.15;
};

struct PretrainRecord {
  std::vector<double> epoch_loss;
};

// Edge-existence pre-training. Per batch and graph, a fraction of the
// undirected edges is hidden from message passing; hidden pairs are scored
// positive and an equal number of sampled non-edges negative, with score
// <h_u, h_v> over final node embeddings. Returns the per-epoch mean loss.
// Classifier parameters are not used and are removed from `registry`.
PretrainRecord pretrain_edgepred(const Dataset& data, ParamRegistry& registry,
                                 const ModelConfig& model, const TrainConfig& config,
                                 const EdgePredOptions& options = {});

// One edge-prediction loss evaluation for a batch with explicit hidden and
// negative pairs (node indices local to each graph). Records on the active
// tape.
Tensor edgepred_loss(const ParamRegistry& registry, const ModelConfig& model,
                     std::span<const Graph> visible_graphs,
                     const std::vector<std::vector<std::pair<int, int>>>& positives,
                     const std::vector<std::vector<std::pair<int, int>>>& negatives,
                     Mode mode, Rng* dropout_rng);

// Mean training loss over the first epoch of a supervised run, used to
// compare initializations.
double first_epoch_loss(const RunRecord& record);

}  // namespace gnnpeft
