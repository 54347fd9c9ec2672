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

#include "sercon/spectral.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#include <Eigen/Eigenvalues>

namespace sercon {

ComplexVector eigenvalues_of(const Matrix& m) {
  if (m.rows() == 0) return ComplexVector(0);
  Eigen::EigenSolver<Matrix> solver(m, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    fail(ErrorKind::kNumerical, "eigensolver did not converge");
  }
  return solver.eigenvalues();
}

void sort_lexicographic(ComplexVector& values) {
  std::sort(values.data(), values.data() + values.size(),
            [](const Complex& x, const Complex& y) {
              if (x.real() != y.real()) return x.real() < y.real();
              return x.imag() < y.imag();
            });
}

namespace {

struct Deflation {
  bool ok = false;
  ComplexVector structural;  // eigenvalues of the n x n corner
  ComplexVector rest;
};

// Orthogonal deflation of span(e_1..e_n), e_k = block-ones vector k.
Deflation deflate_consensus(const Matrix& a, int order, int agents) {
  Deflation out;
  const Eigen::Index dim = a.rows();
  if (order < 1 || agents < 1 || dim < Eigen::Index(order) * agents) return out;

  Matrix basis = Matrix::Zero(dim, order);
  for (int k = 0; k < order; ++k) {
    basis.block(Eigen::Index(k) * agents, k, agents, 1).setConstant(
        1.0 / std::sqrt(double(agents)));
  }
  const Matrix corner = basis.transpose() * a * basis;
  const double residual = inf_norm(a * basis - basis * corner);
  if (residual > 1e-10 * std::max(1.0, inf_norm(a))) return out;

  Eigen::HouseholderQR<Matrix> qr(basis);
  const Matrix q = qr.householderQ();
  const Matrix t = q.transpose() * a * q;
  out.ok = true;
  // On the consensus subspace A e_1 = 0 and A e_k = e_{k-1}, so the corner
  // is upper triangular and its eigenvalues are read off the diagonal; a
  // general eigensolve would scatter the Jordan block.
  const Matrix top = t.topLeftCorner(order, order);
  const Matrix lower = top.triangularView<Eigen::StrictlyLower>();
  if (inf_norm(lower) <= 1e-10 * std::max(1.0, inf_norm(a))) {
    out.structural = top.diagonal().cast<Complex>();
  } else {
    out.structural = eigenvalues_of(top);
  }
  out.rest = eigenvalues_of(t.bottomRightCorner(dim - order, dim - order));
  return out;
}

}  // namespace

ComplexVector consensus_eigenvalues(const Matrix& a, int order, int agents,
                                    bool* deflated) {
  Deflation d = deflate_consensus(a, order, agents);
  if (deflated) *deflated = d.ok;
  if (!d.ok) return eigenvalues_of(a);
  ComplexVector all(d.structural.size() + d.rest.size());
  all << d.structural, d.rest;
  return all;
}

SpectrumReport spectrum(const LtiSystem& system,
                        std::optional<double> zero_tolerance) {
  const Matrix& a = system.a;
  require(a.rows() == a.cols(), "state matrix must be square");
  const int n = system.order;

  SpectrumReport report;
  report.expected_zeros = n;
  const double norm = inf_norm(a);
  report.zero_tolerance =
      zero_tolerance.value_or(kZeroToleranceFactor * (norm > 0.0 ? norm : 1.0));
  const double tol = report.zero_tolerance;

  std::vector<Complex> zeros;
  std::vector<Complex> rest;

  Deflation d = deflate_consensus(a, n, system.agents);
  if (d.ok) {
    report.deflated = true;
    for (const Complex& z : d.structural) {
      (std::abs(z) <= tol ? zeros : rest).push_back(z);
    }
    for (const Complex& z : d.rest) {
      (std::abs(z) <= tol ? zeros : rest).push_back(z);
    }
  } else {
    ComplexVector values = eigenvalues_of(a);
    std::vector<Complex> sorted(values.data(), values.data() + values.size());
    std::sort(sorted.begin(), sorted.end(), [](const Complex& x, const Complex& y) {
      return std::abs(x) < std::abs(y);
    });
    // Jordan-block scatter of a size-n zero cluster is O((eps ||A||)^(1/n)).
    const double eps = std::numeric_limits<double>::epsilon();
    const double cluster_radius =
        n > 0 ? std::max(tol, 10.0 * std::pow(eps * std::max(norm, 1.0), 1.0 / n))
              : tol;
    std::size_t count = 0;
    while (count < sorted.size() && std::abs(sorted[count]) <= tol) ++count;
    if (n > 0 && count < std::size_t(n) && sorted.size() >= std::size_t(n) &&
        std::abs(sorted[n - 1]) <= cluster_radius) {
      const bool separated =
          sorted.size() == std::size_t(n) ||
          std::abs(sorted[n]) >= kClusterSeparation * std::abs(sorted[n - 1]);
      if (separated) count = n;
    }
    zeros.assign(sorted.begin(), sorted.begin() + count);
    rest.assign(sorted.begin() + count, sorted.end());
  }

  report.structural_zeros = static_cast<int>(zeros.size());
  report.max_real_part_excluding_zeros = -std::numeric_limits<double>::infinity();
  for (const Complex& z : rest) {
    report.max_real_part_excluding_zeros =
        std::max(report.max_real_part_excluding_zeros, z.real());
  }
  report.stable = report.structural_zeros == n &&
                  (rest.empty() || report.max_real_part_excluding_zeros < -tol);

  ComplexVector rest_sorted =
      Eigen::Map<ComplexVector>(rest.data(), Eigen::Index(rest.size()));
  sort_lexicographic(rest_sorted);
  report.eigenvalues.resize(Eigen::Index(zeros.size() + rest.size()));
  for (std::size_t i = 0; i < zeros.size(); ++i) report.eigenvalues(i) = zeros[i];
  report.eigenvalues.tail(rest_sorted.size()) = rest_sorted;
  return report;
}

double pairing_distance(ComplexVector lhs, ComplexVector rhs) {
  require(lhs.size() == rhs.size(), "multisets differ in size");
  sort_lexicographic(lhs);
  sort_lexicographic(rhs);
  std::vector<char> used(rhs.size(), 0);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < lhs.size(); ++i) {
    Eigen::Index best = -1;
    double best_distance = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < rhs.size(); ++j) {
      if (used[j]) continue;
      const double dist = std::abs(lhs(i) - rhs(j));
      if (dist < best_distance) {
        best_distance = dist;
        best = j;
      }
    }
    used[best] = 1;
    worst = std::max(worst, best_distance);
  }
  return worst;
}

PoleUnionCheck verify_pole_union(const SerialDesign& design, double tolerance) {
  const LtiSystem system = realize_serial(design, false);
  const ComplexVector poles =
      consensus_eigenvalues(system.a, system.order, system.agents);

  ComplexVector expected(poles.size());
  Eigen::Index offset = 0;
  for (const Matrix& l : design.laplacians()) {
    const ComplexVector values = eigenvalues_of(-l);
    expected.segment(offset, values.size()) = values;
    offset += values.size();
  }
  PoleUnionCheck check;
  check.max_distance = pairing_distance(poles, expected);
  check.match = check.max_distance < tolerance;
  return check;
}

Complex cycle_lambda2(int nodes) {
  require(nodes >= 2, "cycle needs at least two nodes");
  const double angle = 2.0 * std::numbers::pi / nodes;
  return {1.0 - std::cos(angle), -std::sin(angle)};
}

std::string DesignRule::label() const {
  std::ostringstream out;
  out << (kind == Kind::kSerial ? "serial" : "conventional") << "(";
  for (std::size_t i = 0; i < gains.size(); ++i) {
    out << (i ? "," : "") << gains[i];
  }
  out << ")";
  return out.str();
}

LtiSystem DesignRule::realize(const DirectedWeightedGraph& graph) const {
  require(!gains.empty(), "design rule needs at least one gain");
  const Matrix l = laplacian_of(graph).matrix;
  if (kind == Kind::kSerial) return realize_serial(serial_from_scalars(l, gains));
  return realize_conventional(conventional_from_scalars(l, gains));
}

SweepResult stability_sweep(const GraphFamily& family, const DesignRule& rule,
                            int n_min, int n_max, int jobs) {
  return stability_sweep(
      family, rule.label(),
      [&rule](const DirectedWeightedGraph& g) { return rule.realize(g); },
      n_min, n_max, jobs);
}

SweepResult stability_sweep(const GraphFamily& family, const std::string& label,
                            const SystemRule& rule, int n_min, int n_max,
                            int jobs) {
  require(n_min >= 1 && n_max >= n_min, "invalid sweep range");
  SweepResult result;
  result.family = family.name();
  result.design = label;
  result.rows.resize(std::size_t(n_max - n_min + 1));

  std::atomic<int> next{0};
  const int total = static_cast<int>(result.rows.size());
  auto worker = [&]() {
    for (int idx = next++; idx < total; idx = next++) {
      SweepRow& row = result.rows[idx];
      row.agents = n_min + idx;
      try {
        const SpectrumReport report = spectrum(rule(family.member(row.agents)));
        row.max_real_part = report.max_real_part_excluding_zeros;
        row.stable = report.stable;
        row.structural_zeros = report.structural_zeros;
        row.eigenvalues = report.eigenvalues;
      } catch (const std::exception& e) {
        row.error = e.what();
        row.stable = false;
        row.max_real_part = std::numeric_limits<double>::quiet_NaN();
      }
    }
  };

  int threads = jobs > 0 ? jobs : int(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, total);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (const SweepRow& row : result.rows) {
    if (!row.stable) {
      result.critical_agents = row.agents;
      break;
    }
  }
  return result;
}

}  // namespace sercon
