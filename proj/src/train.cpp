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

#include "gnnpeft/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "gnnpeft/errors.hpp"
#include "gnnpeft/gin.hpp"

namespace gnnpeft {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::vector<std::size_t> batch_slices(std::size_t n, int batch_size) {
  std::vector<std::size_t> starts;
  for (std::size_t s = 0; s < n; s += static_cast<std::size_t>(batch_size)) starts.push_back(s);
  return starts;
}

void erase_classifier(ParamRegistry& registry) {
  for (const char* suffix : {".weight", ".bias"}) {
    const std::string name = std::string(names::kClassifier) + suffix;
    if (registry.contains(name)) registry.erase(name);
  }
}

}  // namespace

Adam::Adam(const TrainConfig& config) : config_(config) {}

void Adam::step(ParamRegistry& registry) {
  ++t_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, t_), c2 = 1.0 - std::pow(b2, t_);
  for (const auto& [name, entry] : registry.params()) {
    if (!entry.trainable) continue;
    Tensor p = entry.tensor;
    auto data = p.data();
    const auto grad = p.grad();
    auto& s = state_[name];
    if (s.m.size() != data.size()) {
      s.m.assign(data.size(), 0.0);
      s.v.assign(data.size(), 0.0);
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double g = grad[i] + config_.weight_decay * data[i];
      s.m[i] = b1 * s.m[i] + (1.0 - b1) * g;
      s.v[i] = b2 * s.v[i] + (1.0 - b2) * g * g;
      const double m_hat = s.m[i] / c1, v_hat = s.v[i] / c2;
      data[i] -= config_.lr * m_hat / (std::sqrt(v_hat) + config_.adam_eps);
    }
  }
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw DimensionError("roc_auc: " + std::to_string(scores.size()) + " scores for " +
                         std::to_string(labels.size()) + " labels");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  std::int64_t positives = 0, negatives = 0;
  for (const int y : labels) (y == 1 ? positives : negatives) += 1;
  if (positives == 0 || negatives == 0) {
    throw MetricUndefinedError("roc_auc: need at least one positive and one negative");
  }
  // Twice the pair credit, so ties stay integral.
  std::int64_t credit2 = 0, negatives_below = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::int64_t pos = 0, neg = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == 1 ? pos : neg) += 1;
      ++j;
    }
    credit2 += 2 * pos * negatives_below + pos * neg;
    negatives_below += neg;
    i = j;
  }
  return static_cast<double>(credit2) / static_cast<double>(2 * positives * negatives);
}

double roc_auc(const Tensor& scores, const Tensor& labels, const Tensor& mask) {
  if (scores.shape() != labels.shape() || scores.shape() != mask.shape() || scores.dim() != 2) {
    throw DimensionError("roc_auc: scores, labels and mask must share a G x T shape");
  }
  const std::size_t rows = scores.rows(), tasks = scores.cols();
  double total = 0.0;
  int valid = 0;
  for (std::size_t t = 0; t < tasks; ++t) {
    std::vector<double> s;
    std::vector<int> y;
    for (std::size_t r = 0; r < rows; ++r) {
      if (mask.at(r, t) == 0.0) continue;
      s.push_back(scores.at(r, t));
      y.push_back(labels.at(r, t) == 1.0 ? 1 : 0);
    }
    const auto pos = std::count(y.begin(), y.end(), 1);
    if (pos == 0 || pos == static_cast<std::ptrdiff_t>(y.size())) continue;
    total += roc_auc(s, y);
    ++valid;
  }
  if (valid == 0) throw MetricUndefinedError("roc_auc: no task has both classes");
  return total / valid;
}

RunSummary RunRecord::summary() const {
  RunSummary s;
  if (epochs.empty()) return s;
  const auto& last = epochs.back();
  s.train_loss = last.train_loss;
  s.train_auc = last.train_auc;
  s.test_auc = last.test_auc;
  s.train_error = 1.0 - last.train_auc;
  s.test_error = 1.0 - last.test_auc;
  s.gap = last.train_auc - last.test_auc;
  s.error_gap = s.test_error - s.train_error;
  return s;
}

double generalization_gap(const RunRecord& record) { return record.summary().gap; }

std::string run_record_csv(const RunRecord& record) {
  std::ostringstream os;
  os << "epoch,train_loss,train_auc,test_auc,gap\n";
  for (const auto& e : record.epochs) {
    os << e.epoch << ',' << fmt(e.train_loss) << ',' << fmt(e.train_auc) << ','
       << fmt(e.test_auc) << ',' << fmt(e.gap()) << '\n';
  }
  return os.str();
}

nlohmann::ordered_json run_summary_json(const RunRecord& record) {
  const auto s = record.summary();
  auto num = [](double v) { return std::isnan(v) ? nlohmann::ordered_json() : nlohmann::ordered_json(v); };
  nlohmann::ordered_json j;
  j["fingerprint"] = record.fingerprint;
  j["epochs"] = record.epochs.size();
  j["final_train_loss"] = num(s.train_loss);
  j["final_train_auc"] = num(s.train_auc);
  j["final_test_auc"] = num(s.test_auc);
  j["train_error"] = num(s.train_error);
  j["test_error"] = num(s.test_error);
  j["gap_auc"] = num(s.gap);
  j["gap_error"] = num(s.error_gap);
  j["train_error_definition"] = "1 - train ROC-AUC (proxy for 0-1 training error)";
  return j;
}

Tensor predict(const ParamRegistry& registry, const ModelConfig& config,
               const Dataset& data, int batch_size) {
  const auto tasks = static_cast<std::size_t>(config.num_tasks);
  Tensor out = Tensor::zeros({data.size(), tasks});
  for (const std::size_t start : batch_slices(data.size(), batch_size)) {
    const std::size_t end = std::min(data.size(), start + static_cast<std::size_t>(batch_size));
    const GraphBatch batch =
        make_batch(std::span<const Graph>(data.data() + start, end - start), config.vocab);
    const Tensor logits =
        classify(registry, gin_forward(registry, config, batch, Mode::kEval, nullptr));
    std::copy(logits.data().begin(), logits.data().end(),
              out.data().begin() + static_cast<std::ptrdiff_t>(start * tasks));
  }
  return out;
}

double evaluate_auc(const ParamRegistry& registry, const ModelConfig& config,
                    const Dataset& data, int batch_size) {
  if (data.empty()) return kNaN;
  const Tensor scores = predict(registry, config, data, batch_size);
  const GraphBatch all = make_batch(data, config.vocab);
  try {
    return roc_auc(scores, all.labels, all.mask);
  } catch (const MetricUndefinedError&) {
    return kNaN;
  }
}

RunRecord train_supervised(const Dataset& train, const Dataset& test,
                           ParamRegistry& registry, const ModelConfig& model,
                           const TrainConfig& config, const TrainOptions& options) {
  model.validate();
  config.validate();
  if (train.empty()) throw ArgumentError("training split is empty");
  const Rng root(config.seed);
  Rng shuffle_rng = root.split("shuffle");
  Rng dropout_rng = root.split("dropout");
  Adam adam(config);
  registry.zero_grad();

  RunRecord record;
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<Graph> chunk;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    int batches = 0;
    for (const std::size_t start : batch_slices(order.size(), config.batch_size)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      chunk.clear();
      for (std::size_t i = start; i < end; ++i) chunk.push_back(train[order[i]]);
      const GraphBatch batch = make_batch(chunk, model.vocab);
      if (std::all_of(batch.mask.data().begin(), batch.mask.data().end(),
                      [](double m) { return m == 0.0; })) {
        continue;
      }
      Tape tape;
      TapeScope scope(tape);
      const Tensor logits =
          classify(registry, gin_forward(registry, model, batch, Mode::kTrain, &dropout_rng));
      Tensor loss = ops::bce_with_logits(logits, batch.labels, batch.mask);
      if (!std::isfinite(loss.item())) {
        throw DivergenceError(epoch, "non-finite training loss");
      }
      loss_sum += loss.item();
      ++batches;
      if (loss.requires_grad()) {
        tape.backward(loss);
        adam.step(registry);
        registry.zero_grad();
      }
    }
    EpochRecord e;
    e.epoch = epoch;
    e.train_loss = batches ? loss_sum / batches : kNaN;
    if (options.eval_every_epoch || epoch == config.epochs) {
      e.train_auc = evaluate_auc(registry, model, train);
      e.test_auc = evaluate_auc(registry, model, test);
    } else {
      e.train_auc = e.test_auc = kNaN;
    }
    record.epochs.push_back(e);
    if (options.on_epoch) options.on_epoch(epoch, registry);
  }
  return record;
}

Tensor edgepred_loss(const ParamRegistry& registry, const ModelConfig& model,
                     std::span<const Graph> visible_graphs,
                     const std::vector<std::vector<std::pair<int, int>>>& positives,
                     const std::vector<std::vector<std::pair<int, int>>>& negatives,
                     Mode mode, Rng* dropout_rng) {
  const GraphBatch batch = make_batch(visible_graphs, model.vocab);
  std::vector<int> left, right;
  std::vector<double> target;
  for (std::size_t g = 0; g < visible_graphs.size(); ++g) {
    const int offset = batch.node_offset[g];
    for (const auto& [u, v] : positives[g]) {
      left.push_back(offset + u);
      right.push_back(offset + v);
      target.push_back(1.0);
    }
    for (const auto& [u, v] : negatives[g]) {
      left.push_back(offset + u);
      right.push_back(offset + v);
      target.push_back(0.0);
    }
  }
  if (target.empty()) throw EmptyLossError("edgepred: batch has no scored pairs");
  const Tensor h = node_forward(registry, model, batch, mode, dropout_rng);
  const Tensor scores = ops::row_dot(ops::gather_rows(h, left), ops::gather_rows(h, right));
  const std::size_t n = target.size();
  return ops::bce_with_logits(scores, Tensor::from({n, 1}, std::move(target)),
                              Tensor::full({n, 1}, 1.0));
}

PretrainRecord pretrain_edgepred(const Dataset& data, ParamRegistry& registry,
                                 const ModelConfig& model, const TrainConfig& config,
                                 const EdgePredOptions& options) {
  model.validate();
  config.validate();
  erase_classifier(registry);
  const Rng root(config.seed);
  Rng shuffle_rng = root.split("pretrain.shuffle");
  Rng dropout_rng = root.split("pretrain.dropout");
  Rng sample_rng = root.split("pretrain.edges");
  Adam adam(config);
  registry.zero_grad();

  PretrainRecord record;
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle_rng.shuffle(std::span<std::size_t>(order));
    double loss_sum = 0.0;
    int batches = 0;
    for (const std::size_t start : batch_slices(order.size(), config.batch_size)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      std::vector<Graph> visible;
      std::vector<std::vector<std::pair<int, int>>> pos, neg;
      for (std::size_t i = start; i < end; ++i) {
        const Graph& g = data[order[i]];
        Graph vis = g;
        std::vector<std::pair<int, int>> hidden, sampled;
        const int m = static_cast<int>(g.edges.size());
        if (m >= 2) {
          const int k = std::max(1, static_cast<int>(std::lround(options.hide_fraction * m)));
          std::vector<int> idx(static_cast<std::size_t>(m));
          std::iota(idx.begin(), idx.end(), 0);
          // Partial Fisher-Yates: the first k entries are a uniform subset.
          for (int a = 0; a < k; ++a) {
            const int b = a + static_cast<int>(sample_rng.below(static_cast<std::uint64_t>(m - a)));
            std::swap(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
          }
          std::set<int> hide(idx.begin(), idx.begin() + k);
          vis.edges.clear();
          for (int e = 0; e < m; ++e) {
            const auto& edge = g.edges[static_cast<std::size_t>(e)];
            if (hide.contains(e)) {
              hidden.emplace_back(edge.u, edge.v);
            } else {
              vis.edges.push_back(edge);
            }
          }
          std::set<std::pair<int, int>> present;
          for (const auto& edge : g.edges) {
            present.emplace(std::min(edge.u, edge.v), std::max(edge.u, edge.v));
          }
          const long long possible = static_cast<long long>(g.num_nodes) * (g.num_nodes - 1) / 2;
          if (possible > static_cast<long long>(present.size())) {
            while (static_cast<int>(sampled.size()) < k) {
              const int u = static_cast<int>(sample_rng.below(static_cast<std::uint64_t>(g.num_nodes)));
              const int v = static_cast<int>(sample_rng.below(static_cast<std::uint64_t>(g.num_nodes)));
              if (u == v || present.contains({std::min(u, v), std::max(u, v)})) continue;
              sampled.emplace_back(u, v);
            }
          }
        }
        visible.push_back(std::move(vis));
        pos.push_back(std::move(hidden));
        neg.push_back(std::move(sampled));
      }
      const bool any_pairs = std::any_of(pos.begin(), pos.end(), [](const auto& p) { return !p.empty(); });
      if (!any_pairs) continue;
      Tape tape;
      TapeScope scope(tape);
      Tensor loss = edgepred_loss(registry, model, visible, pos, neg, Mode::kTrain, &dropout_rng);
      if (!std::isfinite(loss.item())) throw DivergenceError(epoch, "non-finite pre-training loss");
      loss_sum += loss.item();
      ++batches;
      if (loss.requires_grad()) {
        tape.backward(loss);
        adam.step(registry);
        registry.zero_grad();
      }
    }
    record.epoch_loss.push_back(batches ? loss_sum / batches : kNaN);
  }
  return record;
}

double first_epoch_loss(const RunRecord& record) {
  if (record.epochs.empty()) throw ArgumentError("run has no epochs");
  return record.epochs.front().train_loss;
}

}  // namespace gnnpeft
