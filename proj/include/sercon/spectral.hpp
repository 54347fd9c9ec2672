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

#ifndef SERCON_SPECTRAL_HPP_
#define SERCON_SPECTRAL_HPP_

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sercon/common.hpp"
#include "sercon/graph.hpp"
#include "sercon/synthesis.hpp"

namespace sercon {

inline constexpr double kZeroToleranceFactor = 1e-7;
inline constexpr double kClusterSeparation = 100.0;

struct SpectrumReport {
  // Structural zeros first, remaining eigenvalues sorted by (Re, Im).
  ComplexVector eigenvalues;
  int expected_zeros = 0;  // the system order n
  int structural_zeros = 0;
  double max_real_part_excluding_zeros = 0.0;  // -inf when nothing remains
  double zero_tolerance = 0.0;
  bool stable = false;
  // True when the block-ones consensus subspace was deflated before the
  // eigensolve; false when the cluster heuristic was used instead.
  bool deflated = false;
};

// Consensus-stability classification: exactly n eigenvalues at zero and
// every other eigenvalue with real part below -zero_tolerance. The default
// tolerance is 1e-7 * ||A||_inf.
//
// For consensus closed loops the n zeros form a single Jordan block whose
// computed eigenvalues scatter by O(eps^(1/n)). When the span of the
// block-ones vectors is an invariant subspace of A it is deflated with an
// orthogonal change of basis, and the zeros are read from the n x n
// nilpotent corner. Otherwise the n smallest-magnitude eigenvalues are
// taken as structural if they are separated from the rest by a factor of
// at least 100.
SpectrumReport spectrum(const LtiSystem& system,
                        std::optional<double> zero_tolerance = std::nullopt);

// Eigenvalues of A via the same deflation path used by spectrum().
ComplexVector consensus_eigenvalues(const Matrix& a, int order, int agents,
                                    bool* deflated = nullptr);

ComplexVector eigenvalues_of(const Matrix& m);

// Sort by (Re, Im).
void sort_lexicographic(ComplexVector& values);

struct PoleUnionCheck {
  bool match = false;
  double max_distance = 0.0;
};

// Compares the closed-loop poles with the multiset union of the
// eigenvalues of -L_k using greedy nearest-neighbour pairing after a
// lexicographic sort.
PoleUnionCheck verify_pole_union(const SerialDesign& design,
                                 double tolerance = 1e-7);

// Max pairing distance between two multisets (greedy, as above).
double pairing_distance(ComplexVector lhs, ComplexVector rhs);

// Second eigenvalue of the directed-cycle Laplacian:
// 1 - cos(2 pi / N) - i sin(2 pi / N).
Complex cycle_lambda2(int nodes);

// Maps a graph to a closed loop with N-independent gains.
struct DesignRule {
  enum class Kind { kSerial, kConventional };

  Kind kind = Kind::kSerial;
  // Serial: L_k = gains[k-1] L. Conventional: A_k = gains[k] L.
  std::vector<double> gains;

  int order() const { return static_cast<int>(gains.size()); }
  std::string label() const;
  LtiSystem realize(const DirectedWeightedGraph& graph) const;
};

struct SweepRow {
  int agents = 0;
  double max_real_part = 0.0;
  bool stable = false;
  int structural_zeros = 0;
  ComplexVector eigenvalues;
  std::string error;  // non-empty when the eigensolver failed for this N
};

struct SweepResult {
  std::string family;
  std::string design;
  std::vector<SweepRow> rows;
  std::optional<int> critical_agents;  // smallest N with stable == false
};

using SystemRule = std::function<LtiSystem(const DirectedWeightedGraph&)>;

// Runs the spectrum classification for every N in [n_min, n_max]. Work is
// spread over `jobs` threads (0 = hardware concurrency); rows are stored
// by N so the result does not depend on scheduling.
SweepResult stability_sweep(const GraphFamily& family, const DesignRule& rule,
                            int n_min, int n_max, int jobs = 0);
SweepResult stability_sweep(const GraphFamily& family, const std::string& label,
                            const SystemRule& rule, int n_min, int n_max,
                            int jobs = 0);

}  // namespace sercon

#endif  // SERCON_SPECTRAL_HPP_
