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

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gnnpeft/tensor.hpp"

namespace gnnpeft {

// Two categorical attributes per node and per edge.
struct VocabSizes {
  std::array<int, 2> node{8, 4};
  std::array<int, 2> edge{4, 3};

  // Edge code reserved for self-loops in each edge attribute column.
  int self_loop_code(int column) const { return edge[static_cast<std::size_t>(column)]; }
  bool operator==(const VocabSizes&) const = default;
};

struct Edge {
  int u = 0;
  int v = 0;
  std::array<int, 2> attr{0, 0};
  bool operator==(const Edge&) const = default;
};

inline constexpr int kMissingLabel = -1;

struct Graph {
  int num_nodes = 0;
  std::vector<std::array<int, 2>> node_attrs;
  // Undirected pairs; no self-pairs.
  std::vector<Edge> edges;
  // One entry per task: 0, 1 or kMissingLabel.
  std::vector<int> labels;

  int num_tasks() const { return static_cast<int>(labels.size()); }
  // |E| - N + number of connected components.
  int cyclomatic_number() const;
  bool operator==(const Graph&) const = default;
};

using Dataset = std::vector<Graph>;

// Throws ArgumentError naming the offending field.
void validate_graph(const Graph& g, const VocabSizes& vocab);

std::string to_jsonl_line(const Graph& g);
void write_jsonl(std::ostream& os, const Dataset& data);
void write_jsonl(const std::filesystem::path& path, const Dataset& data);

// Every line is validated against `vocab`; failures raise ParseError carrying
// the 1-based line number. All graphs must have the same number of tasks.
Dataset parse_jsonl(std::istream& is, const VocabSizes& vocab = {});
Dataset load_jsonl(const std::filesystem::path& path, const VocabSizes& vocab = {});

struct SyntheticSpec {
  int n_graphs = 200;
  int min_nodes = 8;
  int max_nodes = 16;
  double edge_prob = 0.25;
  VocabSizes vocab;
  int n_tasks = 1;
  double missing_rate = 0.1;
  std::uint64_t seed = 0;
};

// True iff some triangle has all three nodes with node attribute 0 == value.
bool has_planted_triangle(const Graph& g, int value);

// Erdos-Renyi graphs with uniform attribute codes. Task t is positive iff
// has_planted_triangle(g, t mod vocab.node[0]); a `missing_rate` fraction of
// labels is replaced by kMissingLabel.
Dataset generate_synthetic(const SyntheticSpec& spec);

enum class SplitMode { kRandom, kStructure };

struct SplitSpec {
  double train = 0.8;
  double valid = 0.1;
  double test = 0.1;
  SplitMode mode = SplitMode::kStructure;
};

struct DataSplits {
  Dataset train;
  Dataset valid;
  Dataset test;
};

// Structure mode sorts by cyclomatic number (stable in dataset order) and
// slices contiguously, so test graphs are the most cyclic. Random mode
// shuffles with `seed` first.
DataSplits split(const Dataset& data, const SplitSpec& spec, std::uint64_t seed);

struct GraphBatch {
  int num_graphs = 0;
  int num_nodes = 0;
  int num_tasks = 0;
  // Per node.
  std::vector<int> node_attr0, node_attr1;
  std::vector<int> graph_id;
  std::vector<int> node_offset;  // first node of each graph; size num_graphs
  // Directed edges: both directions of every stored pair, then one self-loop
  // per node carrying the reserved code.
  std::vector<int> edge_src, edge_dst;
  std::vector<int> edge_attr0, edge_attr1;
  // num_graphs x num_tasks; mask is 0 where the label is missing.
  Tensor labels;
  Tensor mask;

  int num_edges() const { return static_cast<int>(edge_src.size()); }
};

GraphBatch make_batch(std::span<const Graph> graphs, const VocabSizes& vocab);

}  // namespace gnnpeft
