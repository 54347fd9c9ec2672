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

#include "sercon/graph.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace sercon {

DirectedWeightedGraph::DirectedWeightedGraph(Matrix weights)
    : weights_(std::move(weights)) {
  require(weights_.rows() >= 1 && weights_.rows() == weights_.cols(),
          "adjacency matrix must be square and non-empty");
  for (Eigen::Index i = 0; i < weights_.rows(); ++i) {
    for (Eigen::Index j = 0; j < weights_.cols(); ++j) {
      const double w = weights_(i, j);
      std::ostringstream where;
      where << "(" << i << ", " << j << ")";
      require(std::isfinite(w), "non-finite weight at " + where.str());
      require(w >= 0.0, "negative weight at " + where.str());
      require(i != j || w == 0.0, "nonzero diagonal weight at " + where.str());
    }
  }
}

DirectedWeightedGraph DirectedWeightedGraph::from_edges(
    int nodes, const std::vector<Edge>& edges) {
  require(nodes >= 1, "graph needs at least one node");
  Matrix w = Matrix::Zero(nodes, nodes);
  for (const Edge& e : edges) {
    require(e.from >= 0 && e.from < nodes && e.to >= 0 && e.to < nodes,
            "edge endpoint out of range");
    w(e.to, e.from) += e.weight;
  }
  return DirectedWeightedGraph(std::move(w));
}

std::vector<Edge> DirectedWeightedGraph::edges() const {
  std::vector<Edge> out;
  for (int i = 0; i < size(); ++i) {
    for (int j = 0; j < size(); ++j) {
      if (weights_(i, j) > 0.0) out.push_back({j, i, weights_(i, j)});
    }
  }
  return out;
}

Laplacian laplacian_of(const DirectedWeightedGraph& graph) {
  const Matrix& w = graph.weights();
  Matrix l = -w;
  l.diagonal() = w.rowwise().sum();
  return Laplacian{std::move(l)};
}

bool is_laplacian(const Matrix& m, double tolerance) {
  if (m.rows() != m.cols() || m.rows() == 0) return false;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (m(i, i) < 0.0) return false;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (i != j && m(i, j) > 0.0) return false;
    }
    const double scale = std::max(1.0, m(i, i));
    if (std::abs(m.row(i).sum()) > tolerance * scale) return false;
  }
  return true;
}

DirectedWeightedGraph graph_of_laplacian(const Matrix& laplacian) {
  require(is_laplacian(laplacian), "matrix is not a graph Laplacian");
  Matrix w = -laplacian;
  w.diagonal().setZero();
  // Round-off can leave tiny negative entries only if the input had them;
  // is_laplacian already excluded that.
  return DirectedWeightedGraph(std::move(w));
}

bool has_connected_spanning_tree(const DirectedWeightedGraph& graph) {
  // The last vertex to finish in a depth-first search lies in a source
  // component of the condensation; the graph has a rooted spanning tree
  // iff that vertex reaches everything.
  const int n = graph.size();
  const Matrix& w = graph.weights();
  std::vector<char> visited(n, 0);
  int last_finished = 0;

  for (int start = 0; start < n; ++start) {
    if (visited[start]) continue;
    // Iterative DFS along arcs j -> i, i.e. from column j to rows i.
    std::vector<std::pair<int, int>> stack{{start, 0}};
    visited[start] = 1;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      while (next < n && (visited[next] || w(next, node) <= 0.0)) ++next;
      if (next == n) {
        last_finished = node;
        stack.pop_back();
      } else {
        const int child = next++;
        visited[child] = 1;
        stack.emplace_back(child, 0);
      }
    }
  }

  std::vector<char> reached(n, 0);
  std::vector<int> queue{last_finished};
  reached[last_finished] = 1;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const int j = queue[head];
    for (int i = 0; i < n; ++i) {
      if (!reached[i] && w(i, j) > 0.0) {
        reached[i] = 1;
        queue.push_back(i);
      }
    }
  }
  return static_cast<int>(queue.size()) == n;
}

FamilyKind parse_family_kind(std::string_view name) {
  if (name == "directed_cycle" || name == "cycle") return FamilyKind::kDirectedCycle;
  if (name == "leader_chain") return FamilyKind::kLeaderChain;
  if (name == "path") return FamilyKind::kPath;
  if (name == "complete") return FamilyKind::kComplete;
  fail(ErrorKind::kInvalidArgument,
       "unknown graph family '" + std::string(name) + "'");
}

std::string family_name(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::kDirectedCycle: return "directed_cycle";
    case FamilyKind::kLeaderChain: return "leader_chain";
    case FamilyKind::kPath: return "path";
    case FamilyKind::kComplete: return "complete";
    case FamilyKind::kCustom: return "custom";
  }
  return "custom";
}

DirectedWeightedGraph make_family(FamilyKind kind, int nodes) {
  require(nodes >= 1, "family size must be at least 1");
  Matrix w = Matrix::Zero(nodes, nodes);
  for (int i = 0; i < nodes; ++i) {
    for (int j = 0; j < nodes; ++j) {
      if (i == j) continue;
      bool edge = false;
      switch (kind) {
        case FamilyKind::kDirectedCycle:
          edge = (i - j + nodes) % nodes == 1 % nodes;
          break;
        case FamilyKind::kLeaderChain:
          edge = std::abs(i - j) == 1 && i != 0;
          break;
        case FamilyKind::kPath:
          edge = std::abs(i - j) == 1;
          break;
        case FamilyKind::kComplete:
          edge = true;
          break;
        case FamilyKind::kCustom:
          fail(ErrorKind::kInvalidArgument,
               "custom families need an explicit generator");
      }
      if (edge) w(i, j) = 1.0;
    }
  }
  return DirectedWeightedGraph(std::move(w));
}

GraphFamily::GraphFamily(FamilyKind kind)
    : kind_(kind), name_(family_name(kind)) {
  require(kind != FamilyKind::kCustom, "custom families need a generator");
  generator_ = [kind](int nodes) { return make_family(kind, nodes); };
}

GraphFamily::GraphFamily(std::string name, Generator generator)
    : kind_(FamilyKind::kCustom),
      name_(std::move(name)),
      generator_(std::move(generator)) {
  require(static_cast<bool>(generator_), "empty family generator");
}

DirectedWeightedGraph GraphFamily::member(int nodes) const {
  return generator_(nodes);
}

}  // namespace sercon
