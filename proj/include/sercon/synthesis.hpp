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

#ifndef SERCON_SYNTHESIS_HPP_
#define SERCON_SYNTHESIS_HPP_

#include <string>
#include <vector>

#include "sercon/common.hpp"
#include "sercon/sparsity.hpp"

namespace sercon {

// Continuous-time state-space model x' = A x + B u, y = C x + D u.
//
// `agents` and `order` describe consensus closed loops: the output is the
// N-vector of agent positions and the model has relative degree `order`
// from input to output, so x^(k) = C A^k state for k < order. Generic
// systems (perturbation blocks) use order 0.
struct LtiSystem {
  Matrix a, b, c, d;
  int agents = 0;
  int order = 0;
  std::string state_labels;

  Eigen::Index state_dim() const { return a.rows(); }
  Eigen::Index inputs() const { return b.cols(); }
  Eigen::Index outputs() const { return c.rows(); }
  bool is_static() const { return a.rows() == 0; }

  // Throws kInvalidArgument on inconsistent shapes or non-finite entries.
  void validate() const;
};

LtiSystem static_system(const Matrix& gain);

// C (sI - A)^{-1} B + D.
ComplexMatrix transfer_function(const LtiSystem& system, Complex s);

inline constexpr int kMaxSerialOrder = 8;

// Serial consensus closed loop (sI + L_1)(sI + L_2)...(sI + L_n) X = U_ref,
// expanded as s^n I + sum_k s^k A_k.
class SerialDesign {
 public:
  SerialDesign(std::vector<Matrix> laplacians, std::vector<Matrix> coefficients);

  int order() const { return static_cast<int>(laplacians_.size()); }
  int agents() const { return static_cast<int>(laplacians_.front().rows()); }
  const std::vector<Matrix>& laplacians() const { return laplacians_; }
  // coefficients()[k] multiplies s^k, k = 0..n-1.
  const std::vector<Matrix>& coefficients() const { return coefficients_; }

 private:
  std::vector<Matrix> laplacians_;
  std::vector<Matrix> coefficients_;
};

// Conventional closed loop s^n I + sum_k s^k A_k with A_k acting on x^(k).
struct ConventionalDesign {
  std::vector<Matrix> gains;  // A_0..A_{n-1}

  int order() const { return static_cast<int>(gains.size()); }
  int agents() const { return static_cast<int>(gains.front().rows()); }
  void validate() const;
};

// A_k = p_k L.
ConventionalDesign conventional_from_scalars(const Matrix& laplacian,
                                             const std::vector<double>& gains);

// Multiplies out the factors one at a time, keeping the matrix coefficient
// list; products keep increasing factor index (L_1 L_2 ... ).
SerialDesign expand_serial(std::vector<Matrix> laplacians);

// L_k = scales[k] * L.
SerialDesign serial_from_scalars(const Matrix& laplacian,
                                 const std::vector<double>& scales);

// binom(n, ceil(n/2)) * max(c, c^n).
double gain_bound(int order, double c);

double binomial(int n, int k);

// Serial chain: xi_1 = x, xi_j' = -M_j xi_j + xi_{j+1}, xi_n' = -M_n xi_n + u.
// The factor next to the output is applied last in the product, so the
// chain holds M_j = L_{n+1-j}; the transfer function is then exactly
// [(sI + L_1)...(sI + L_n)]^{-1}. For commuting Laplacians (L_k = p_k L)
// this coincides with M_j = L_j.
LtiSystem realize_serial(const SerialDesign& design, bool with_input = true);

// Chain matrices M_1..M_n as placed along the realized chain.
std::vector<Matrix> serial_chain(const SerialDesign& design);

// Block companion form over (x, x', ..., x^(n-1)).
LtiSystem realize_conventional(const ConventionalDesign& design);

// Relative-state feedback u = u_ref - sum_k A_k x^(k) that turns n
// integrators into the serial closed loop.
ConventionalDesign controller_of_serial(const SerialDesign& design);

// Evaluates s^n I + sum_k s^k A_k.
Matrix coefficient_polynomial(const std::vector<Matrix>& coefficients, double s);

struct LocalityReport {
  double c = 0.0;        // per-Laplacian gain bound used
  double c_prime = 0.0;  // gain_bound(n, c)
  int hops = 0;          // n
  std::vector<ClassVerdict> laplacian_verdicts;    // L_k in class(1, c)
  std::vector<ClassVerdict> coefficient_verdicts;  // A_k in class(n, c')
  std::vector<ClassVerdict> tight_verdicts;  // A_k in class(n-k, binom c^{n-k})
  double max_coefficient_norm = 0.0;

  bool preconditions_hold() const;
  bool all_pass() const;
};

// Locality of the expanded controller. c <= 0 uses max_k ||L_k||_inf.
LocalityReport check_locality(const SerialDesign& design,
                              const Matrix& adjacency, double c = 0.0);

}  // namespace sercon

#endif  // SERCON_SYNTHESIS_HPP_
