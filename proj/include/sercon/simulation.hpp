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

#ifndef SERCON_SIMULATION_HPP_
#define SERCON_SIMULATION_HPP_

#include <cstddef>
#include <optional>
#include <vector>

#include "sercon/common.hpp"
#include "sercon/synthesis.hpp"

namespace sercon {

// u(t) = sum_m coefficients[m] * (t - start)^m on [start, next start).
struct PolynomialPiece {
  double start = 0.0;
  std::vector<Vector> coefficients;
};

enum class ReferenceKind {
  kZero,
  kImpulse,                     // u = v delta(t): an initial jump B v
  kLeaderConstantAcceleration,  // leader follows x = a t^2 / 2
  kPiecewisePolynomial,
};

class ReferenceSignal {
 public:
  static ReferenceSignal zero();
  static ReferenceSignal impulse(Vector weights);
  static ReferenceSignal leader_constant_acceleration(int leader,
                                                      double acceleration);
  static ReferenceSignal piecewise_polynomial(std::vector<PolynomialPiece> pieces);

  ReferenceKind kind() const { return kind_; }
  const std::vector<PolynomialPiece>& pieces() const { return pieces_; }
  const Vector& impulse_weights() const { return impulse_; }
  int leader() const { return leader_; }
  double acceleration() const { return acceleration_; }

  // Value of the polynomial part at time t (impulses excluded).
  Vector value(double t, Eigen::Index inputs) const;

 private:
  ReferenceKind kind_ = ReferenceKind::kZero;
  std::vector<PolynomialPiece> pieces_;
  Vector impulse_;
  int leader_ = 0;
  double acceleration_ = 0.0;
};

inline constexpr double kDivergenceNorm = 1e12;

struct SimulationTrace {
  std::vector<double> times;
  Matrix states;                    // state_dim x samples
  std::vector<Matrix> derivatives;  // per k: agents x samples
  Matrix spreads;                   // order x samples: max_ij |x_i^(k) - x_j^(k)|
  Matrix agreement;                 // order x samples: mean over agents
  std::optional<std::size_t> diverged_at;  // first sample past the norm cap
  int agents = 0;
  int order = 0;

  std::size_t samples() const { return times.size(); }
};

// x^(k) = C A^k state for k < max(order, 1).
std::vector<Matrix> derivative_maps(const LtiSystem& system);

// State whose derivative readout equals `derivatives` (k = 0..n-1); extra
// states beyond the first n*N are set to zero.
Vector state_from_derivatives(const LtiSystem& system,
                              const std::vector<Vector>& derivatives);

// Exact zero-order-free discretization: the input polynomial is appended
// to the state as a chain of integrators and the augmented system is
// stepped with its matrix exponential. Piece boundaries that fall between
// grid points are handled with split steps. Stops early (diverged_at set)
// once the state is non-finite or its norm exceeds 1e12.
SimulationTrace simulate(const LtiSystem& system, const Vector& x0,
                         const ReferenceSignal& reference, double horizon,
                         double dt);

// Derivative blocks of a serial-chain trace from its xi blocks using the
// bidiagonal structure, without numerical differentiation.
std::vector<Matrix> derivatives_from_serial_state(const SerialDesign& design,
                                                  const Matrix& states);

struct ConsensusVerdict {
  bool consensus = false;
  // First time after which spread_k never exceeds epsilon; empty if the
  // spread is still above epsilon at the last sample.
  std::vector<std::optional<double>> settling_times;
  std::optional<double> divergence_time;
};

inline constexpr double kDefaultConsensusEpsilon = 1e-6;
inline constexpr double kDefaultWindowFraction = 0.1;

// Consensus holds when every spread stays below epsilon over the final
// `window` seconds (default: 10% of the simulated span).
ConsensusVerdict consensus_verdict(const SimulationTrace& trace,
                                   double epsilon = kDefaultConsensusEpsilon,
                                   std::optional<double> window = std::nullopt);

}  // namespace sercon

#endif  // SERCON_SIMULATION_HPP_
