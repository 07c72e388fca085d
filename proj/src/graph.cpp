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

#include "gnnpeft/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "gnnpeft/errors.hpp"

namespace gnnpeft {
namespace {

using ordered_json = nlohmann::ordered_json;

int find_root(std::vector<int>& parent, int x) {
  while (parent[static_cast<std::size_t>(x)] != x) {
    auto& p = parent[static_cast<std::size_t>(x)];
    p = parent[static_cast<std::size_t>(p)];
    x = p;
  }
  return x;
}

std::vector<std::vector<char>> adjacency(const Graph& g) {
  std::vector<std::vector<char>> adj(static_cast<std::size_t>(g.num_nodes),
                                     std::vector<char>(static_cast<std::size_t>(g.num_nodes), 0));
  for (const auto& e : g.edges) {
    adj[static_cast<std::size_t>(e.u)][static_cast<std::size_t>(e.v)] = 1;
    adj[static_cast<std::size_t>(e.v)][static_cast<std::size_t>(e.u)] = 1;
  }
  return adj;
}

int as_int(const ordered_json& v, const char* what) {
  if (!v.is_number_integer()) {
    throw std::invalid_argument(std::string(what) + " must be an integer");
  }
  return v.get<int>();
}

Graph graph_from_json(const ordered_json& j) {
  if (!j.is_object()) throw std::invalid_argument("line is not a JSON object");
  for (const char* key : {"nodes", "edges", "labels"}) {
    if (!j.contains(key) || !j.at(key).is_array()) {
      throw std::invalid_argument(std::string("missing array field \"") + key + "\"");
    }
  }
  Graph g;
  for (const auto& node : j.at("nodes")) {
    if (!node.is_array() || node.size() != 2) {
      throw std::invalid_argument("node entry must be [a0, a1]");
    }
    g.node_attrs.push_back({as_int(node[0], "node attribute"),
                            as_int(node[1], "node attribute")});
  }
  g.num_nodes = static_cast<int>(g.node_attrs.size());
  for (const auto& edge : j.at("edges")) {
    if (!edge.is_array() || edge.size() != 4) {
      throw std::invalid_argument("edge entry must be [u, v, b0, b1]");
    }
    g.edges.push_back(Edge{as_int(edge[0], "edge endpoint"),
                           as_int(edge[1], "edge endpoint"),
                           {as_int(edge[2], "edge attribute"),
                            as_int(edge[3], "edge attribute")}});
  }
  for (const auto& label : j.at("labels")) g.labels.push_back(as_int(label, "label"));
  return g;
}

}  // namespace

int Graph::cyclomatic_number() const {
  std::vector<int> parent(static_cast<std::size_t>(num_nodes));
  std::iota(parent.begin(), parent.end(), 0);
  int components = num_nodes;
  for (const auto& e : edges) {
    const int a = find_root(parent, e.u), b = find_root(parent, e.v);
    if (a != b) {
      parent[static_cast<std::size_t>(a)] = b;
      --components;
    }
  }
  return static_cast<int>(edges.size()) - num_nodes + components;
}

void validate_graph(const Graph& g, const VocabSizes& vocab) {
  if (g.num_nodes < 1) throw ArgumentError("graph has no nodes");
  if (static_cast<int>(g.node_attrs.size()) != g.num_nodes) {
    throw ArgumentError("node attribute count differs from node count");
  }
  for (int i = 0; i < g.num_nodes; ++i) {
    for (int c = 0; c < 2; ++c) {
      const int code = g.node_attrs[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)];
      if (code < 0 || code >= vocab.node[static_cast<std::size_t>(c)]) {
        throw ArgumentError("node " + std::to_string(i) + " attribute " +
                            std::to_string(c) + " code " + std::to_string(code) +
                            " outside vocabulary of size " +
                            std::to_string(vocab.node[static_cast<std::size_t>(c)]));
      }
    }
  }
  for (std::size_t k = 0; k < g.edges.size(); ++k) {
    const auto& e = g.edges[k];
    for (const int end : {e.u, e.v}) {
      if (end < 0 || end >= g.num_nodes) {
        throw ArgumentError("edge " + std::to_string(k) + " endpoint " +
                            std::to_string(end) + " dangles (graph has " +
                            std::to_string(g.num_nodes) + " nodes)");
      }
    }
    if (e.u == e.v) {
      throw ArgumentError("edge " + std::to_string(k) + " is a self-pair on node " +
                          std::to_string(e.u));
    }
    for (int c = 0; c < 2; ++c) {
      const int code = e.attr[static_cast<std::size_t>(c)];
      if (code < 0 || code >= vocab.edge[static_cast<std::size_t>(c)]) {
        throw ArgumentError("edge " + std::to_string(k) + " attribute " +
                            std::to_string(c) + " code " + std::to_string(code) +
                            " outside vocabulary of size " +
                            std::to_string(vocab.edge[static_cast<std::size_t>(c)]));
      }
    }
  }
  for (const int y : g.labels) {
    if (y != 0 && y != 1 && y != kMissingLabel) {
      throw ArgumentError("label " + std::to_string(y) + " is not 0, 1 or -1");
    }
  }
}

std::string to_jsonl_line(const Graph& g) {
  ordered_json j;
  j["nodes"] = ordered_json::array();
  for (const auto& a : g.node_attrs) j["nodes"].push_back({a[0], a[1]});
  j["edges"] = ordered_json::array();
  for (const auto& e : g.edges) j["edges"].push_back({e.u, e.v, e.attr[0], e.attr[1]});
  j["labels"] = g.labels;
  return j.dump();
}

void write_jsonl(std::ostream& os, const Dataset& data) {
  for (const auto& g : data) os << to_jsonl_line(g) << '\n';
}

void write_jsonl(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  write_jsonl(os, data);
}

Dataset parse_jsonl(std::istream& is, const VocabSizes& vocab) {
  Dataset data;
  std::string line;
  std::size_t line_no = 0;
  int tasks = -1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    Graph g;
    try {
      g = graph_from_json(ordered_json::parse(line));
      validate_graph(g, vocab);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(line_no, std::string("malformed JSON: ") + e.what());
    } catch (const std::exception& e) {
      throw ParseError(line_no, e.what());
    }
    if (tasks < 0) tasks = g.num_tasks();
    if (g.num_tasks() != tasks) {
      throw ParseError(line_no, "expected " + std::to_string(tasks) + " labels, got " +
                                    std::to_string(g.num_tasks()));
    }
    data.push_back(std::move(g));
  }
  return data;
}

Dataset load_jsonl(const std::filesystem::path& path, const VocabSizes& vocab) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  return parse_jsonl(is, vocab);
}

bool has_planted_triangle(const Graph& g, int value) {
  const auto adj = adjacency(g);
  std::vector<int> marked;
  for (int i = 0; i < g.num_nodes; ++i)
    if (g.node_attrs[static_cast<std::size_t>(i)][0] == value) marked.push_back(i);
  for (std::size_t a = 0; a < marked.size(); ++a)
    for (std::size_t b = a + 1; b < marked.size(); ++b) {
      const auto u = static_cast<std::size_t>(marked[a]);
      const auto v = static_cast<std::size_t>(marked[b]);
      if (!adj[u][v]) continue;
      for (std::size_t c = b + 1; c < marked.size(); ++c) {
        const auto w = static_cast<std::size_t>(marked[c]);
        if (adj[u][w] && adj[v][w]) return true;
      }
    }
  return false;
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
  if (spec.min_nodes > spec.max_nodes) {
    throw ArgumentError("node_range [" + std::to_string(spec.min_nodes) + ", " +
                        std::to_string(spec.max_nodes) + "] is empty");
  }
  if (spec.min_nodes < 3 || spec.max_nodes > 64) {
    throw ArgumentError("node_range must lie within [3, 64]");
  }
  if (spec.n_tasks < 1) throw ArgumentError("n_tasks must be at least 1");
  if (spec.n_graphs < 0) throw ArgumentError("n_graphs must be non-negative");
  if (spec.edge_prob < 0.0 || spec.edge_prob > 1.0) {
    throw ArgumentError("edge_prob must lie in [0, 1]");
  }
  for (const int v : {spec.vocab.node[0], spec.vocab.node[1], spec.vocab.edge[0],
                      spec.vocab.edge[1]}) {
    if (v < 1) throw ArgumentError("vocabulary sizes must be positive");
  }

  const Rng root(spec.seed);
  const Rng structure_root = root.split("structure");
  const Rng missing_root = root.split("missing");
  Dataset data;
  data.reserve(static_cast<std::size_t>(spec.n_graphs));
  for (int i = 0; i < spec.n_graphs; ++i) {
    Rng rng = structure_root.split(static_cast<std::uint64_t>(i));
    Graph g;
    g.num_nodes = spec.min_nodes +
                  static_cast<int>(rng.below(static_cast<std::uint64_t>(
                      spec.max_nodes - spec.min_nodes + 1)));
    for (int n = 0; n < g.num_nodes; ++n) {
      g.node_attrs.push_back(
          {static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.vocab.node[0]))),
           static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.vocab.node[1])))});
    }
    for (int u = 0; u < g.num_nodes; ++u) {
      for (int v = u + 1; v < g.num_nodes; ++v) {
        if (!rng.bernoulli(spec.edge_prob)) continue;
        g.edges.push_back(Edge{
            u, v,
            {static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.vocab.edge[0]))),
             static_cast<int>(rng.below(static_cast<std::uint64_t>(spec.vocab.edge[1])))}});
      }
    }
    Rng missing = missing_root.split(static_cast<std::uint64_t>(i));
    for (int t = 0; t < spec.n_tasks; ++t) {
      const int label = has_planted_triangle(g, t % spec.vocab.node[0]) ? 1 : 0;
      g.labels.push_back(missing.bernoulli(spec.missing_rate) ? kMissingLabel : label);
    }
    data.push_back(std::move(g));
  }
  return data;
}

DataSplits split(const Dataset& data, const SplitSpec& spec, std::uint64_t seed) {
  if (data.empty()) throw ArgumentError("cannot split an empty dataset");
  if (spec.train < 0 || spec.valid < 0 || spec.test < 0 ||
      std::abs(spec.train + spec.valid + spec.test - 1.0) > 1e-9) {
    throw ArgumentError("split fractions must be non-negative and sum to 1");
  }
  const std::size_t n = data.size();
  const auto n_train = static_cast<std::size_t>(std::llround(spec.train * static_cast<double>(n)));
  const auto n_valid = static_cast<std::size_t>(std::llround(spec.valid * static_cast<double>(n)));
  if (n_train == 0 || n_valid == 0 || n_train + n_valid >= n) {
    throw ArgumentError("split of " + std::to_string(n) +
                        " graphs leaves an empty partition");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  if (spec.mode == SplitMode::kRandom) {
    Rng rng = Rng(seed).split("split");
    rng.shuffle(std::span<std::size_t>(order));
  } else {
    std::vector<int> key(n);
    for (std::size_t i = 0; i < n; ++i) key[i] = data[i].cyclomatic_number();
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });
  }
  DataSplits out;
  for (std::size_t i = 0; i < n; ++i) {
    const Graph& g = data[order[i]];
    if (i < n_train) {
      out.train.push_back(g);
    } else if (i < n_train + n_valid) {
      out.valid.push_back(g);
    } else {
      out.test.push_back(g);
    }
  }
  return out;
}

GraphBatch make_batch(std::span<const Graph> graphs, const VocabSizes& vocab) {
  if (graphs.empty()) throw ArgumentError("cannot batch an empty list of graphs");
  GraphBatch b;
  b.num_graphs = static_cast<int>(graphs.size());
  b.num_tasks = graphs.front().num_tasks();
  std::vector<double> labels, mask;
  int offset = 0;
  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    const Graph& g = graphs[gi];
    if (g.num_tasks() != b.num_tasks) {
      throw ArgumentError("graphs in a batch disagree on the number of tasks");
    }
    b.node_offset.push_back(offset);
    for (int i = 0; i < g.num_nodes; ++i) {
      b.node_attr0.push_back(g.node_attrs[static_cast<std::size_t>(i)][0]);
      b.node_attr1.push_back(g.node_attrs[static_cast<std::size_t>(i)][1]);
      b.graph_id.push_back(static_cast<int>(gi));
    }
    for (const auto& e : g.edges) {
      for (const auto& [src, dst] : {std::pair{e.u, e.v}, std::pair{e.v, e.u}}) {
        b.edge_src.push_back(offset + src);
        b.edge_dst.push_back(offset + dst);
        b.edge_attr0.push_back(e.attr[0]);
        b.edge_attr1.push_back(e.attr[1]);
      }
    }
    for (int i = 0; i < g.num_nodes; ++i) {
      b.edge_src.push_back(offset + i);
      b.edge_dst.push_back(offset + i);
      b.edge_attr0.push_back(vocab.self_loop_code(0));
      b.edge_attr1.push_back(vocab.self_loop_code(1));
    }
    for (const int y : g.labels) {
      labels.push_back(y == 1 ? 1.0 : 0.0);
      mask.push_back(y == kMissingLabel ? 0.0 : 1.0);
    }
    offset += g.num_nodes;
  }
  b.num_nodes = offset;
  const auto rows = static_cast<std::size_t>(b.num_graphs);
  const auto cols = static_cast<std::size_t>(b.num_tasks);
  b.labels = Tensor::from({rows, cols}, std::move(labels));
  b.mask = Tensor::from({rows, cols}, std::move(mask));
  return b;
}

}  // namespace gnnpeft
