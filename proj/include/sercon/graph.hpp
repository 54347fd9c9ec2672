/*
Copyright 2026 The sercon Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#ifndef SERCON_GRAPH_HPP_
#define SERCON_GRAPH_HPP_

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "sercon/common.hpp"

namespace sercon {

// Edge j -> i with weight w: agent i measures agent j.
struct Edge {
  int from = 0;
  int to = 0;
  double weight = 1.0;
};

// Weighted directed graph stored as a dense adjacency matrix W where
// W(i, j) > 0 iff there is an edge j -> i. Immutable after construction.
class DirectedWeightedGraph {
 public:
  // Throws kInvalidArgument on negative, non-finite or diagonal weights.
  explicit DirectedWeightedGraph(Matrix weights);

  static DirectedWeightedGraph from_edges(int nodes,
                                          const std::vector<Edge>& edges);

  int size() const { return static_cast<int>(weights_.rows()); }
  const Matrix& weights() const { return weights_; }
  bool has_edge(int from, int to) const { return weights_(to, from) > 0.0; }
  bool is_undirected() const { return weights_ == weights_.transpose(); }
  std::vector<Edge> edges() const;

 private:
  Matrix weights_;
};

// L = D - W with D the diagonal of row sums. Rows sum to zero.
struct Laplacian {
  Matrix matrix;

  int size() const { return static_cast<int>(matrix.rows()); }
};

Laplacian laplacian_of(const DirectedWeightedGraph& graph);

// Checks the Laplacian sign pattern and zero row sums (absolute 1e-12,
// scaled by the diagonal magnitude for weighted graphs).
bool is_laplacian(const Matrix& m, double tolerance = 1e-12);

// Recovers the adjacency matrix from a Laplacian (W = -offdiag(L)).
DirectedWeightedGraph graph_of_laplacian(const Matrix& laplacian);

// True iff some root reaches every node along edges j -> i.
bool has_connected_spanning_tree(const DirectedWeightedGraph& graph);

enum class FamilyKind { kDirectedCycle, kLeaderChain, kPath, kComplete, kCustom };

FamilyKind parse_family_kind(std::string_view name);
std::string family_name(FamilyKind kind);

// Built-in families with unit weights:
//   directed_cycle: W(i, j) = 1 iff i - j = 1 (mod N)
//   leader_chain:   W(i, j) = 1 iff |i - j| = 1 and i is not the leader (0)
//   path:           undirected path
//   complete:       every ordered pair of distinct nodes
DirectedWeightedGraph make_family(FamilyKind kind, int nodes);

// A growing family; custom families carry their own deterministic generator.
class GraphFamily {
 public:
  using Generator = std::function<DirectedWeightedGraph(int)>;

  explicit GraphFamily(FamilyKind kind);
  GraphFamily(std::string name, Generator generator);

  FamilyKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  DirectedWeightedGraph member(int nodes) const;

 private:
  FamilyKind kind_;
  std::string name_;
  Generator generator_;
};

}  // namespace sercon

#endif  // SERCON_GRAPH_HPP_
