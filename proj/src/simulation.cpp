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

#include "sercon/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include <unsupported/Eigen/MatrixFunctions>

namespace sercon {

ReferenceSignal ReferenceSignal::zero() { return ReferenceSignal(); }

ReferenceSignal ReferenceSignal::impulse(Vector weights) {
  ReferenceSignal r;
  r.kind_ = ReferenceKind::kImpulse;
  r.impulse_ = std::move(weights);
  return r;
}

ReferenceSignal ReferenceSignal::leader_constant_acceleration(int leader,
                                                              double acceleration) {
  require(leader >= 0, "leader index must be nonnegative");
  ReferenceSignal r;
  r.kind_ = ReferenceKind::kLeaderConstantAcceleration;
  r.leader_ = leader;
  r.acceleration_ = acceleration;
  return r;
}

ReferenceSignal ReferenceSignal::piecewise_polynomial(
    std::vector<PolynomialPiece> pieces) {
  std::sort(pieces.begin(), pieces.end(),
            [](const PolynomialPiece& a, const PolynomialPiece& b) {
              return a.start < b.start;
            });
  for (const PolynomialPiece& p : pieces) {
    require(!p.coefficients.empty(), "polynomial piece without coefficients");
    require(std::isfinite(p.start), "non-finite piece start");
    for (const Vector& c : p.coefficients) {
      require(c.size() == p.coefficients.front().size() && c.allFinite(),
              "inconsistent polynomial coefficients");
    }
  }
  ReferenceSignal r;
  r.kind_ = ReferenceKind::kPiecewisePolynomial;
  r.pieces_ = std::move(pieces);
  return r;
}

Vector ReferenceSignal::value(double t, Eigen::Index inputs) const {
  Vector u = Vector::Zero(inputs);
  const PolynomialPiece* active = nullptr;
  for (const PolynomialPiece& p : pieces_) {
    if (p.start <= t) active = &p;
  }
  if (active == nullptr) return u;
  double power = 1.0;
  for (const Vector& c : active->coefficients) {
    u += c * power;
    power *= t - active->start;
  }
  return u;
}

std::vector<Matrix> derivative_maps(const LtiSystem& system) {
  const int levels = std::max(system.order, 1);
  std::vector<Matrix> maps;
  Matrix current = system.c;
  for (int k = 0; k < levels; ++k) {
    maps.push_back(current);
    current = current * system.a;
  }
  return maps;
}

Vector state_from_derivatives(const LtiSystem& system,
                              const std::vector<Vector>& derivatives) {
  const int n = system.order;
  const Eigen::Index agents = system.agents;
  require(n >= 1 && int(derivatives.size()) == n,
          "need one derivative block per order");
  const Eigen::Index core = n * agents;
  require(system.state_dim() >= core, "state too small for derivative blocks");

  Matrix readout(core, core);
  Vector target(core);
  const std::vector<Matrix> maps = derivative_maps(system);
  for (int k = 0; k < n; ++k) {
    require(derivatives[k].size() == agents, "derivative block size mismatch");
    readout.middleRows(k * agents, agents) = maps[k].leftCols(core);
    target.segment(k * agents, agents) = derivatives[k];
  }
  Eigen::FullPivLU<Matrix> lu(readout);
  if (!lu.isInvertible()) {
    fail(ErrorKind::kPrecondition,
         "derivative readout is singular; state cannot be reconstructed");
  }
  Vector state = Vector::Zero(system.state_dim());
  state.head(core) = lu.solve(target);
  return state;
}

namespace {

double factorial(int m) {
  double f = 1.0;
  for (int i = 2; i <= m; ++i) f *= i;
  return f;
}

// Values of u, u', ..., u^(degree) at time t for a polynomial piece.
Vector piece_derivatives(const PolynomialPiece& piece, double t, int degree,
                         Eigen::Index inputs) {
  Vector out = Vector::Zero((degree + 1) * inputs);
  const double tau = t - piece.start;
  const int terms = static_cast<int>(piece.coefficients.size());
  for (int j = 0; j < terms; ++j) {
    for (int m = j; m < terms; ++m) {
      const double scale = factorial(m) / factorial(m - j) * std::pow(tau, m - j);
      out.segment(j * inputs, inputs) += scale * piece.coefficients[m];
    }
  }
  return out;
}

}  // namespace

SimulationTrace simulate(const LtiSystem& system, const Vector& x0,
                         const ReferenceSignal& reference, double horizon,
                         double dt) {
  system.validate();
  require(dt > 0.0 && std::isfinite(dt), "time step must be positive");
  require(horizon >= dt && std::isfinite(horizon), "horizon must be at least one step");
  require(x0.size() == system.state_dim(), "initial state dimension mismatch");
  require(x0.allFinite(), "initial state must be finite");

  const Eigen::Index dim = system.state_dim();
  const Eigen::Index inputs = system.inputs();
  Vector start = x0;
  std::vector<PolynomialPiece> pieces;

  switch (reference.kind()) {
    case ReferenceKind::kZero:
      break;
    case ReferenceKind::kImpulse:
      require(reference.impulse_weights().size() == inputs,
              "impulse weight size must match the input count");
      start += system.b * reference.impulse_weights();
      break;
    case ReferenceKind::kPiecewisePolynomial:
      pieces = reference.pieces();
      for (const PolynomialPiece& p : pieces) {
        require(p.coefficients.front().size() == inputs,
                "polynomial coefficient size must match the input count");
      }
      break;
    case ReferenceKind::kLeaderConstantAcceleration: {
      const int n = system.order;
      const int leader = reference.leader();
      require(n >= 1 && leader < system.agents && inputs == system.agents,
              "leader acceleration needs a consensus system driven per agent");
      const double accel = reference.acceleration();
      if (n >= 3) {
        std::vector<Vector> derivs(n, Vector::Zero(system.agents));
        derivs[2](leader) = accel;
        start += state_from_derivatives(system, derivs);
      } else {
        PolynomialPiece piece;
        piece.start = 0.0;
        // n = 2: constant input; n = 1: velocity ramp.
        piece.coefficients.assign(n == 2 ? 1 : 2, Vector::Zero(inputs));
        piece.coefficients.back()(leader) = accel;
        pieces.push_back(std::move(piece));
      }
      break;
    }
  }

  int degree = -1;
  for (const PolynomialPiece& p : pieces) {
    degree = std::max(degree, static_cast<int>(p.coefficients.size()) - 1);
  }
  const Eigen::Index extra = inputs > 0 ? (degree + 1) * inputs : 0;
  const Eigen::Index total = dim + extra;

  Matrix augmented = Matrix::Zero(total, total);
  augmented.topLeftCorner(dim, dim) = system.a;
  if (extra > 0) {
    augmented.block(0, dim, dim, inputs) = system.b;
    for (int j = 0; j < degree; ++j) {
      augmented.block(dim + j * inputs, dim + (j + 1) * inputs, inputs, inputs)
          .setIdentity();
    }
  }

  const auto load_piece = [&](Vector& z, double t) {
    if (extra == 0) return;
    const PolynomialPiece* active = nullptr;
    for (const PolynomialPiece& p : pieces) {
      if (p.start <= t) active = &p;
    }
    if (active == nullptr) {
      z.tail(extra).setZero();
    } else {
      z.tail(extra) = piece_derivatives(*active, t, degree, inputs);
    }
  };

  const auto steps = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
  const Matrix step_map = (augmented * dt).exp();

  SimulationTrace trace;
  trace.agents = system.agents;
  trace.order = std::max(system.order, 1);
  trace.times.reserve(steps + 1);
  Matrix states(dim, steps + 1);

  Vector z(total);
  z.head(dim) = start;
  load_piece(z, 0.0);
  trace.times.push_back(0.0);
  states.col(0) = z.head(dim);

  std::size_t recorded = 1;
  for (std::size_t i = 0; i < steps; ++i) {
    const double t0 = double(i) * dt;
    // The last step is shortened so the grid ends on the horizon.
    const double t1 = i + 1 == steps ? horizon : double(i + 1) * dt;
    const bool full_step = std::abs((t1 - t0) - dt) <= 1e-12 * dt;
    std::vector<double> breaks;
    for (const PolynomialPiece& p : pieces) {
      if (p.start > t0 && p.start < t1) breaks.push_back(p.start);
    }
    if (breaks.empty()) {
      z = full_step ? Vector(step_map * z) : Vector((augmented * (t1 - t0)).exp() * z);
    } else {
      double t = t0;
      for (double b : breaks) {
        z = (augmented * (b - t)).exp() * z;
        t = b;
        load_piece(z, t);
      }
      z = (augmented * (t1 - t)).exp() * z;
    }
    // A piece starting exactly on the grid takes over from here.
    for (const PolynomialPiece& p : pieces) {
      if (p.start == t1) load_piece(z, t1);
    }

    trace.times.push_back(t1);
    states.col(i + 1) = z.head(dim);
    ++recorded;
    const auto x = z.head(dim);
    if (!x.allFinite() || x.norm() > kDivergenceNorm) {
      trace.diverged_at = i + 1;
      break;
    }
  }
  trace.states = states.leftCols(recorded);

  const std::vector<Matrix> maps = derivative_maps(system);
  trace.spreads.resize(trace.order, recorded);
  trace.agreement.resize(trace.order, recorded);
  for (int k = 0; k < trace.order; ++k) {
    trace.derivatives.push_back(maps[k] * trace.states);
    const Matrix& d = trace.derivatives.back();
    for (std::size_t s = 0; s < recorded; ++s) {
      if (d.rows() == 0) {
        trace.spreads(k, s) = 0.0;
        trace.agreement(k, s) = 0.0;
        continue;
      }
      trace.spreads(k, s) = d.col(s).maxCoeff() - d.col(s).minCoeff();
      trace.agreement(k, s) = d.col(s).mean();
    }
  }
  return trace;
}

std::vector<Matrix> derivatives_from_serial_state(const SerialDesign& design,
                                                  const Matrix& states) {
  const int n = design.order();
  const Eigen::Index agents = design.agents();
  require(states.rows() == n * agents, "state rows must equal n * N");
  const std::vector<Matrix> chain = serial_chain(design);

  // Row-block coefficients R_k with x^(k) = sum_j R_k[j] xi_j. Multiplying
  // by the bidiagonal A gives R_{k+1}[j] = -R_k[j] M_j + R_k[j-1].
  std::vector<Matrix> row(n, Matrix::Zero(agents, agents));
  row[0].setIdentity();
  std::vector<Matrix> out;
  for (int k = 0; k < n; ++k) {
    Matrix x = Matrix::Zero(agents, states.cols());
    for (int j = 0; j < n; ++j) {
      if (!row[j].isZero(0.0)) x += row[j] * states.middleRows(j * agents, agents);
    }
    out.push_back(std::move(x));
    std::vector<Matrix> next(n, Matrix::Zero(agents, agents));
    for (int j = 0; j < n; ++j) {
      next[j] = -row[j] * chain[j];
      if (j > 0) next[j] += row[j - 1];
    }
    row = std::move(next);
  }
  return out;
}

ConsensusVerdict consensus_verdict(const SimulationTrace& trace, double epsilon,
                                   std::optional<double> window) {
  require(epsilon > 0.0, "epsilon must be positive");
  require(!trace.times.empty(), "empty trace");
  ConsensusVerdict verdict;
  const double t_end = trace.times.back();
  const double span = window.value_or(kDefaultWindowFraction * t_end);
  require(span >= 0.0, "window must be nonnegative");

  verdict.consensus = !trace.diverged_at.has_value();
  if (trace.diverged_at) verdict.divergence_time = trace.times[*trace.diverged_at];

  const std::size_t samples = trace.times.size();
  for (int k = 0; k < trace.order; ++k) {
    std::optional<std::size_t> last_violation;
    for (std::size_t s = samples; s-- > 0;) {
      if (!(trace.spreads(k, s) <= epsilon)) {
        last_violation = s;
        break;
      }
    }
    if (!last_violation) {
      verdict.settling_times.push_back(trace.times.front());
    } else if (*last_violation + 1 < samples) {
      verdict.settling_times.push_back(trace.times[*last_violation + 1]);
    } else {
      verdict.settling_times.push_back(std::nullopt);
    }
    if (last_violation && trace.times[*last_violation] >= t_end - span) {
      verdict.consensus = false;
    }
  }
  return verdict;
}

}  // namespace sercon
