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

#include "sercon/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace sercon {

void LtiSystem::validate() const {
  const Eigen::Index n = a.rows();
  require(a.cols() == n, "state matrix must be square");
  require(b.rows() == n, "input matrix row count must match state dimension");
  require(c.cols() == n, "output matrix column count must match state dimension");
  require(d.rows() == c.rows() && d.cols() == b.cols(),
          "feedthrough matrix shape mismatch");
  require(a.allFinite() && b.allFinite() && c.allFinite() && d.allFinite(),
          "system matrices contain non-finite entries");
  require(order >= 0 && agents >= 0, "negative order or agent count");
}

LtiSystem static_system(const Matrix& gain) {
  LtiSystem s;
  s.a = Matrix(0, 0);
  s.b = Matrix(0, gain.cols());
  s.c = Matrix(gain.rows(), 0);
  s.d = gain;
  s.agents = static_cast<int>(gain.rows());
  s.state_labels = "static";
  return s;
}

ComplexMatrix transfer_function(const LtiSystem& system, Complex s) {
  ComplexMatrix result = system.d.cast<Complex>();
  if (system.is_static()) return result;
  const Eigen::Index n = system.state_dim();
  ComplexMatrix resolvent = s * ComplexMatrix::Identity(n, n) -
                            system.a.cast<Complex>();
  result += system.c.cast<Complex>() *
            resolvent.partialPivLu().solve(system.b.cast<Complex>());
  return result;
}

SerialDesign::SerialDesign(std::vector<Matrix> laplacians,
                           std::vector<Matrix> coefficients)
    : laplacians_(std::move(laplacians)), coefficients_(std::move(coefficients)) {
  require(!laplacians_.empty(), "serial design needs at least one Laplacian");
  require(coefficients_.size() == laplacians_.size(),
          "coefficient count must equal the order");
}

void ConventionalDesign::validate() const {
  require(!gains.empty(), "conventional design needs at least one gain");
  const Eigen::Index n = gains.front().rows();
  for (const Matrix& g : gains) {
    require(g.rows() == n && g.cols() == n, "gain matrices must be square and equal-sized");
  }
}

ConventionalDesign conventional_from_scalars(const Matrix& laplacian,
                                             const std::vector<double>& gains) {
  ConventionalDesign design;
  for (double p : gains) design.gains.push_back(p * laplacian);
  design.validate();
  return design;
}

SerialDesign expand_serial(std::vector<Matrix> laplacians) {
  const int n = static_cast<int>(laplacians.size());
  require(n >= 1 && n <= kMaxSerialOrder, "serial order must be in [1, 8]");
  const Eigen::Index agents = laplacians.front().rows();
  for (const Matrix& l : laplacians) {
    require(l.rows() == agents && l.cols() == agents,
            "Laplacians must be square and equal-sized");
  }

  // poly[j] multiplies s^j; start from the first factor (sI + L_1) and
  // multiply further factors on the right.
  std::vector<Matrix> poly{laplacians[0], Matrix::Identity(agents, agents)};
  for (int k = 1; k < n; ++k) {
    const Matrix& l = laplacians[k];
    std::vector<Matrix> next(poly.size() + 1, Matrix::Zero(agents, agents));
    for (std::size_t j = 0; j < poly.size(); ++j) {
      next[j] += poly[j] * l;
      next[j + 1] += poly[j];
    }
    poly = std::move(next);
  }
  poly.pop_back();  // leading s^n I
  return SerialDesign(std::move(laplacians), std::move(poly));
}

SerialDesign serial_from_scalars(const Matrix& laplacian,
                                 const std::vector<double>& scales) {
  std::vector<Matrix> laplacians;
  for (double p : scales) laplacians.push_back(p * laplacian);
  return expand_serial(std::move(laplacians));
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double result = 1.0;
  for (int i = 1; i <= k; ++i) result = result * (n - k + i) / i;
  return std::round(result);
}

double gain_bound(int order, double c) {
  require(order >= 1, "order must be at least 1");
  require(c > 0.0, "gain must be positive");
  return binomial(order, (order + 1) / 2) * std::max(c, std::pow(c, order));
}

std::vector<Matrix> serial_chain(const SerialDesign& design) {
  std::vector<Matrix> chain(design.laplacians().rbegin(),
                            design.laplacians().rend());
  return chain;
}

LtiSystem realize_serial(const SerialDesign& design, bool with_input) {
  const int n = design.order();
  const Eigen::Index agents = design.agents();
  const Eigen::Index dim = n * agents;
  const std::vector<Matrix> chain = serial_chain(design);

  LtiSystem sys;
  sys.a = Matrix::Zero(dim, dim);
  for (int j = 0; j < n; ++j) {
    sys.a.block(j * agents, j * agents, agents, agents) = -chain[j];
    if (j + 1 < n) {
      sys.a.block(j * agents, (j + 1) * agents, agents, agents).setIdentity();
    }
  }
  const Eigen::Index inputs = with_input ? agents : 0;
  sys.b = Matrix::Zero(dim, inputs);
  if (with_input) sys.b.bottomRows(agents).setIdentity();
  sys.c = Matrix::Zero(agents, dim);
  sys.c.leftCols(agents).setIdentity();
  sys.d = Matrix::Zero(agents, inputs);
  sys.agents = static_cast<int>(agents);
  sys.order = n;
  sys.state_labels = "serial chain blocks xi_1..xi_" + std::to_string(n) +
                     " (xi_1 = x)";
  return sys;
}

LtiSystem realize_conventional(const ConventionalDesign& design) {
  design.validate();
  const int n = design.order();
  const Eigen::Index agents = design.agents();
  const Eigen::Index dim = n * agents;

  LtiSystem sys;
  sys.a = Matrix::Zero(dim, dim);
  for (int k = 0; k + 1 < n; ++k) {
    sys.a.block(k * agents, (k + 1) * agents, agents, agents).setIdentity();
  }
  for (int k = 0; k < n; ++k) {
    sys.a.block((n - 1) * agents, k * agents, agents, agents) = -design.gains[k];
  }
  sys.b = Matrix::Zero(dim, agents);
  sys.b.bottomRows(agents).setIdentity();
  sys.c = Matrix::Zero(agents, dim);
  sys.c.leftCols(agents).setIdentity();
  sys.d = Matrix::Zero(agents, agents);
  sys.agents = static_cast<int>(agents);
  sys.order = n;
  sys.state_labels = "derivative blocks x^(0)..x^(" + std::to_string(n - 1) + ")";
  return sys;
}

ConventionalDesign controller_of_serial(const SerialDesign& design) {
  ConventionalDesign controller{design.coefficients()};
  controller.validate();
  return controller;
}

Matrix coefficient_polynomial(const std::vector<Matrix>& coefficients, double s) {
  require(!coefficients.empty(), "empty coefficient list");
  const Eigen::Index agents = coefficients.front().rows();
  // Horner with the monic leading term.
  Matrix result = Matrix::Identity(agents, agents);
  for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) {
    result = s * result + *it;
  }
  return result;
}

bool LocalityReport::preconditions_hold() const {
  return std::all_of(laplacian_verdicts.begin(), laplacian_verdicts.end(),
                     [](const ClassVerdict& v) { return v.member; });
}

bool LocalityReport::all_pass() const {
  const auto ok = [](const std::vector<ClassVerdict>& vs) {
    return std::all_of(vs.begin(), vs.end(),
                       [](const ClassVerdict& v) { return v.member; });
  };
  return ok(laplacian_verdicts) && ok(coefficient_verdicts) && ok(tight_verdicts);
}

LocalityReport check_locality(const SerialDesign& design,
                              const Matrix& adjacency, double c) {
  require(adjacency.rows() == design.agents(),
          "adjacency size does not match the design");
  LocalityReport report;
  const int n = design.order();
  if (c <= 0.0) {
    for (const Matrix& l : design.laplacians()) c = std::max(c, inf_norm(l));
    if (c <= 0.0) c = 1.0;
  }
  report.c = c;
  report.c_prime = gain_bound(n, c);
  report.hops = n;
  for (const Matrix& l : design.laplacians()) {
    report.laplacian_verdicts.push_back(in_class(l, {adjacency, 1, c}));
  }
  for (int k = 0; k < n; ++k) {
    const Matrix& a = design.coefficients()[k];
    report.coefficient_verdicts.push_back(
        in_class(a, {adjacency, n, report.c_prime}));
    const double tight = binomial(n, n - k) * std::pow(c, n - k);
    report.tight_verdicts.push_back(in_class(a, {adjacency, n - k, tight}));
    report.max_coefficient_norm = std::max(report.max_coefficient_norm, inf_norm(a));
  }
  return report;
}

}  // namespace sercon
