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

#include "sercon/robustness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <thread>

#include <Eigen/Eigenvalues>

#include "sercon/graph.hpp"
#include "sercon/simulation.hpp"
#include "sercon/spectral.hpp"

namespace sercon {

std::string mode_name(PerturbationMode mode) {
  return mode == PerturbationMode::kAdditive ? "additive" : "multiplicative";
}

PerturbationMode parse_mode(const std::string& name) {
  if (name == "additive") return PerturbationMode::kAdditive;
  if (name == "multiplicative") return PerturbationMode::kMultiplicative;
  fail(ErrorKind::kInvalidArgument, "unknown perturbation mode '" + name + "'");
}

PerturbationBlock zero_block(int agents, int index, PerturbationMode mode) {
  return PerturbationBlock{static_system(Matrix::Zero(agents, agents)), 0.0,
                           index, mode};
}

PerturbationBlock static_block(const Matrix& gain, int index,
                               PerturbationMode mode) {
  require(gain.rows() == gain.cols(), "static perturbation must be square");
  const double norm =
      gain.size() == 0 ? 0.0 : Eigen::JacobiSVD<Matrix>(gain).singularValues()(0);
  return PerturbationBlock{static_system(gain), norm, index, mode};
}

PerturbationBlock lag_bank_block(const Vector& gains, const Vector& time_constants,
                                 int index, PerturbationMode mode) {
  require(gains.size() == time_constants.size(), "lag bank size mismatch");
  require((time_constants.array() > 0.0).all(), "lag time constants must be positive");
  const Eigen::Index n = gains.size();
  LtiSystem s;
  s.a = (-time_constants.cwiseInverse()).asDiagonal();
  s.b = time_constants.cwiseInverse().asDiagonal();
  s.c = gains.asDiagonal();
  s.d = Matrix::Zero(n, n);
  s.agents = static_cast<int>(n);
  s.state_labels = "diagonal first-order lags";
  return PerturbationBlock{std::move(s), gains.cwiseAbs().maxCoeff(), index, mode};
}

PerturbationBlock scaled(const PerturbationBlock& block, double factor) {
  PerturbationBlock out = block;
  out.realization.c *= factor;
  out.realization.d *= factor;
  out.declared_norm *= std::abs(factor);
  return out;
}

void validate_block(const PerturbationBlock& block, int agents) {
  const LtiSystem& r = block.realization;
  r.validate();
  require(r.inputs() == agents && r.outputs() == agents,
          "perturbation block must be N x N");
  require(block.declared_norm >= 0.0, "declared norm must be nonnegative");
  if (!r.is_static()) {
    const ComplexVector poles = eigenvalues_of(r.a);
    for (const Complex& p : poles) {
      if (!(p.real() < 0.0)) {
        fail(ErrorKind::kPrecondition,
             "perturbation block " + std::to_string(block.index) +
                 " is not Hurwitz stable");
      }
    }
  }
}

double analytic_factor(int order, int k) {
  require(order >= 1 && k >= 0 && k <= order, "need 0 <= k <= n, n >= 1");
  if (k == 0 || k == order) return 1.0;
  const double n = order, kk = k;
  return std::exp(0.5 * (kk * std::log(kk) + (n - kk) * std::log(n - kk) -
                         n * std::log(n)));
}

namespace {

double max_singular_value(const ComplexMatrix& g) {
  if (g.size() == 0) return 0.0;
  if (g.rows() == 1 || g.cols() == 1) return g.norm();
  return Eigen::JacobiSVD<ComplexMatrix>(g).singularValues()(0);
}

void require_hurwitz(const Matrix& a) {
  for (const Complex& p : eigenvalues_of(a)) {
    if (!(p.real() < 0.0)) {
      fail(ErrorKind::kPrecondition,
           "H-infinity norm requested for a system that is not Hurwitz stable");
    }
  }
}

}  // namespace

HinfEstimate hinf_norm_estimate(const LtiSystem& system) {
  system.validate();
  HinfEstimate best;
  const double feedthrough = max_singular_value(system.d.cast<Complex>());
  best.norm = feedthrough;
  best.peak_frequency = std::numeric_limits<double>::infinity();
  if (system.is_static()) return best;
  require_hurwitz(system.a);

  const auto gain = [&](double w) {
    return max_singular_value(transfer_function(system, Complex(0.0, w)));
  };
  const double dc = gain(0.0);
  if (dc > best.norm) best = {dc, 0.0};

  const double log_lo = std::log10(kHinfGridMin);
  const double log_hi = std::log10(kHinfGridMax);
  const double step = (log_hi - log_lo) / (kHinfGridPoints - 1);
  int peak = 0;
  double peak_gain = -1.0;
  for (int i = 0; i < kHinfGridPoints; ++i) {
    const double g = gain(std::pow(10.0, log_lo + i * step));
    if (g > peak_gain) {
      peak_gain = g;
      peak = i;
    }
  }
  if (peak_gain > best.norm) best = {peak_gain, std::pow(10.0, log_lo + peak * step)};

  // Golden-section refinement in log frequency around the grid peak.
  double a = log_lo + std::max(peak - 1, 0) * step;
  double b = log_lo + std::min(peak + 1, kHinfGridPoints - 1) * step;
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - ratio * (b - a), x2 = a + ratio * (b - a);
  double f1 = gain(std::pow(10.0, x1)), f2 = gain(std::pow(10.0, x2));
  for (int it = 0; it < 80 && b - a > 1e-12; ++it) {
    if (f1 > f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - ratio * (b - a);
      f1 = gain(std::pow(10.0, x1));
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + ratio * (b - a);
      f2 = gain(std::pow(10.0, x2));
    }
  }
  const double refined = std::max(f1, f2);
  if (refined > best.norm) {
    best = {refined, std::pow(10.0, f1 > f2 ? x1 : x2)};
  }
  return best;
}

double hinf_norm(const LtiSystem& system) { return hinf_norm_estimate(system).norm; }

double hinf_norm_scalar(const std::vector<double>& numerator,
                        const std::vector<double>& denominator) {
  require(!denominator.empty() && denominator.back() != 0.0,
          "denominator leading coefficient must be nonzero");
  require(numerator.size() <= denominator.size(), "transfer function must be proper");
  const int deg = static_cast<int>(denominator.size()) - 1;
  const double lead = denominator.back();
  std::vector<double> num(denominator.size(), 0.0);
  std::copy(numerator.begin(), numerator.end(), num.begin());
  const double direct = num[deg] / lead;

  // Controllable canonical form of (num - direct * den) / den.
  LtiSystem s;
  s.a = Matrix::Zero(deg, deg);
  s.b = Matrix::Zero(deg, 1);
  s.c = Matrix::Zero(1, deg);
  s.d = Matrix::Constant(1, 1, direct);
  if (deg > 0) {
    s.a.topRightCorner(deg - 1, deg - 1).setIdentity();
    for (int i = 0; i < deg; ++i) {
      s.a(deg - 1, i) = -denominator[i] / lead;
      s.c(0, i) = (num[i] - direct * denominator[i]) / lead;
    }
    s.b(deg - 1, 0) = 1.0;
  }
  return hinf_norm(s);
}

MarginReport additive_margin(int order, const std::vector<double>& norms) {
  require(order >= 1, "order must be at least 1");
  if (int(norms.size()) != order + 1) {
    fail(ErrorKind::kInvalidArgument,
         "additive margin needs n + 1 = " + std::to_string(order + 1) +
             " norms, got " + std::to_string(norms.size()));
  }
  MarginReport report;
  report.mode = PerturbationMode::kAdditive;
  report.order = order;
  report.norms = norms;
  for (int k = 0; k <= order; ++k) {
    require(norms[k] >= 0.0 && std::isfinite(norms[k]), "norms must be finite and >= 0");
    report.weights.push_back(analytic_factor(order, k));
    report.total += norms[k] * report.weights.back();
  }
  report.satisfied = report.total < 1.0;
  report.requires_symmetric = true;
  report.note =
      "sufficient condition; needs L_k = L = L^T with a spanning tree; "
      "grid-based H-infinity norms are accurate to about 1e-4 relative";
  return report;
}

MarginReport multiplicative_margin(const std::vector<double>& norms) {
  require(norms.size() >= 2, "multiplicative margin needs at least two norms");
  MarginReport report;
  report.mode = PerturbationMode::kMultiplicative;
  report.order = static_cast<int>(norms.size()) - 1;
  report.norms = norms;
  const int n = report.order;
  bool each_below_one = true;
  double worst = 0.0;
  for (int k = 0; k <= n; ++k) {
    require(norms[k] >= 0.0 && std::isfinite(norms[k]), "norms must be finite and >= 0");
    report.weights.push_back(1.0);
    if (k >= 1) {
      each_below_one = each_below_one && norms[k] < 1.0;
      worst = std::max(worst, norms[k]);
    }
  }
  const double ends = norms[0] + norms[n];
  report.total = std::max(ends, worst);
  report.satisfied = each_below_one && ends < 1.0;
  report.requires_symmetric = true;
  report.note =
      "sufficient condition; needs symmetric L_k with spanning trees; "
      "grid-based H-infinity norms are accurate to about 1e-4 relative";
  return report;
}

namespace {

// Plant with reference input u, perturbation outputs y (stacked blocks)
// and perturbation inputs z.
struct Interconnection {
  Matrix a, b_u, b_y, c_z, d_zu, d_zy, c_out;
};

LtiSystem close_interconnection(const Interconnection& plant,
                                const std::vector<PerturbationBlock>& blocks,
                                int agents, int order, std::string labels) {
  const Eigen::Index dim = plant.a.rows();
  const Eigen::Index channels = Eigen::Index(blocks.size()) * agents;
  Eigen::Index delta_states = 0;
  for (const PerturbationBlock& b : blocks) delta_states += b.realization.state_dim();

  Matrix ad = Matrix::Zero(delta_states, delta_states);
  Matrix bd = Matrix::Zero(delta_states, channels);
  Matrix cd = Matrix::Zero(channels, delta_states);
  Matrix dd = Matrix::Zero(channels, channels);
  Eigen::Index offset = 0;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const LtiSystem& r = blocks[i].realization;
    const Eigen::Index m = r.state_dim();
    const Eigen::Index io = Eigen::Index(i) * agents;
    ad.block(offset, offset, m, m) = r.a;
    bd.block(offset, io, m, agents) = r.b;
    cd.block(io, offset, agents, m) = r.c;
    dd.block(io, io, agents, agents) = r.d;
    offset += m;
  }

  // y = Cd eta + Dd z, z = Cz xi + Dzu u + Dzy y.
  const Matrix loop = Matrix::Identity(channels, channels) - dd * plant.d_zy;
  Eigen::FullPivLU<Matrix> lu(loop);
  if (!lu.isInvertible()) {
    fail(ErrorKind::kPrecondition, "perturbed interconnection is not well posed");
  }
  const Matrix y_xi = lu.solve(dd * plant.c_z);
  const Matrix y_eta = lu.solve(cd);
  const Matrix y_u = lu.solve(dd * plant.d_zu);
  const Matrix z_xi = plant.c_z + plant.d_zy * y_xi;
  const Matrix z_eta = plant.d_zy * y_eta;
  const Matrix z_u = plant.d_zu + plant.d_zy * y_u;

  LtiSystem sys;
  const Eigen::Index total = dim + delta_states;
  sys.a = Matrix::Zero(total, total);
  sys.a.topLeftCorner(dim, dim) = plant.a + plant.b_y * y_xi;
  sys.a.topRightCorner(dim, delta_states) = plant.b_y * y_eta;
  sys.a.bottomLeftCorner(delta_states, dim) = bd * z_xi;
  sys.a.bottomRightCorner(delta_states, delta_states) = ad + bd * z_eta;
  sys.b = Matrix::Zero(total, plant.b_u.cols());
  sys.b.topRows(dim) = plant.b_u + plant.b_y * y_u;
  sys.b.bottomRows(delta_states) = bd * z_u;
  sys.c = Matrix::Zero(plant.c_out.rows(), total);
  sys.c.leftCols(dim) = plant.c_out;
  sys.d = Matrix::Zero(plant.c_out.rows(), plant.b_u.cols());
  sys.agents = agents;
  sys.order = order;
  sys.state_labels = std::move(labels);
  sys.validate();
  return sys;
}

bool is_symmetric(const Matrix& m) {
  return (m - m.transpose()).cwiseAbs().maxCoeff() <=
         1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff());
}

std::vector<PerturbationBlock> blocks_by_index(
    const std::vector<PerturbationBlock>& blocks, int order, int agents) {
  if (int(blocks.size()) != order + 1) {
    fail(ErrorKind::kInvalidArgument,
         "need one perturbation block per index 0..n");
  }
  std::vector<PerturbationBlock> ordered(order + 1);
  std::vector<char> seen(order + 1, 0);
  for (const PerturbationBlock& b : blocks) {
    require(b.index >= 0 && b.index <= order && !seen[b.index],
            "perturbation indices must cover 0..n exactly once");
    validate_block(b, agents);
    seen[b.index] = 1;
    ordered[b.index] = b;
  }
  return ordered;
}

void require_spanning_tree(const Matrix& l) {
  if (!is_laplacian(l, 1e-10)) {
    fail(ErrorKind::kPrecondition, "perturbed design needs graph Laplacians");
  }
  if (!has_connected_spanning_tree(graph_of_laplacian(l))) {
    fail(ErrorKind::kPrecondition, "Laplacian graph has no connected spanning tree");
  }
}

}  // namespace

LtiSystem assemble_perturbed_additive(const SerialDesign& design,
                                      const std::vector<PerturbationBlock>& blocks,
                                      bool probe_asymmetric) {
  const int n = design.order();
  const int agents = design.agents();
  const Matrix& l = design.laplacians().front();
  for (const Matrix& lk : design.laplacians()) {
    if ((lk - l).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, l.cwiseAbs().maxCoeff())) {
      fail(ErrorKind::kPrecondition,
           "additive perturbation theorem needs L_k = L for all k");
    }
  }
  if (!probe_asymmetric && !is_symmetric(l)) {
    fail(ErrorKind::kPrecondition, "additive perturbation theorem needs L = L^T");
  }
  require_spanning_tree(l);
  const std::vector<PerturbationBlock> ordered = blocks_by_index(blocks, n, agents);

  const LtiSystem nominal = realize_serial(design, true);
  const Eigen::Index dim = nominal.state_dim();
  const Eigen::Index channels = Eigen::Index(n + 1) * agents;

  Interconnection p;
  p.a = nominal.a;
  p.b_u = nominal.b;
  p.b_y = Matrix::Zero(dim, channels);
  for (int k = 0; k <= n; ++k) {
    p.b_y.block(dim - agents, Eigen::Index(k) * agents, agents, agents).setIdentity();
  }
  p.c_z = Matrix::Zero(channels, dim);
  p.d_zu = Matrix::Zero(channels, agents);
  p.d_zy = Matrix::Zero(channels, channels);

  // z_k = L^(n-k) x^(k) with x^(k) = C A^k xi for k < n.
  Matrix readout = nominal.c;  // C A^k
  std::vector<Matrix> l_power(n + 1, Matrix::Identity(agents, agents));
  for (int k = 1; k <= n; ++k) l_power[k] = l_power[k - 1] * l;
  for (int k = 0; k < n; ++k) {
    p.c_z.middleRows(Eigen::Index(k) * agents, agents) = l_power[n - k] * readout;
    readout = readout * nominal.a;
  }
  // s^n X = C A^n xi + (u + sum_k y_k), since C A^(n-1) B = I.
  p.c_z.bottomRows(agents) = readout;
  p.d_zu.bottomRows(agents).setIdentity();
  for (int k = 0; k <= n; ++k) {
    p.d_zy.block(Eigen::Index(n) * agents, Eigen::Index(k) * agents, agents, agents)
        .setIdentity();
  }
  p.c_out = nominal.c;

  return close_interconnection(p, ordered, agents, n,
                               "serial chain xi_1..xi_" + std::to_string(n) +
                                   " then additive perturbation states");
}

LtiSystem assemble_perturbed_multiplicative(
    const std::vector<Matrix>& laplacians,
    const std::vector<PerturbationBlock>& blocks, bool probe_asymmetric) {
  const int n = static_cast<int>(laplacians.size());
  require(n >= 1 && n <= kMaxSerialOrder, "order must be in [1, 8]");
  const int agents = static_cast<int>(laplacians.front().rows());
  for (const Matrix& l : laplacians) {
    require(l.rows() == agents && l.cols() == agents, "Laplacian size mismatch");
    if (!probe_asymmetric && !is_symmetric(l)) {
      fail(ErrorKind::kPrecondition,
           "multiplicative perturbation theorem needs symmetric L_k");
    }
    require_spanning_tree(l);
  }
  const std::vector<PerturbationBlock> ordered = blocks_by_index(blocks, n, agents);

  const Eigen::Index dim = Eigen::Index(n) * agents;
  const Eigen::Index channels = Eigen::Index(n + 1) * agents;
  Interconnection p;
  p.a = Matrix::Zero(dim, dim);
  for (int j = 0; j < n; ++j) {
    p.a.block(j * agents, j * agents, agents, agents) = -laplacians[j];
    if (j + 1 < n) p.a.block(j * agents, (j + 1) * agents, agents, agents).setIdentity();
  }
  p.b_u = Matrix::Zero(dim, agents);
  p.b_u.bottomRows(agents).setIdentity();
  p.b_y = Matrix::Zero(dim, channels);
  p.c_z = Matrix::Zero(channels, dim);
  p.d_zu = Matrix::Zero(channels, agents);
  p.d_zy = Matrix::Zero(channels, channels);

  // Factor k (k = 1..n): z_k = L_k xi_k, y_k subtracted from xi_k'.
  for (int k = 1; k <= n; ++k) {
    const Eigen::Index row = Eigen::Index(k - 1) * agents;
    p.c_z.block(Eigen::Index(k) * agents, row, agents, agents) = laplacians[k - 1];
    p.b_y.block(row, Eigen::Index(k) * agents, agents, agents) = -Matrix::Identity(agents, agents);
  }
  // Input factor: y_0 = D_0 xi_n' is subtracted from xi_n', with
  // z_0 = xi_n' = -L_n xi_n + u - y_n - y_0.
  p.b_y.block(dim - agents, 0, agents, agents) = -Matrix::Identity(agents, agents);
  p.c_z.topRows(agents) = p.a.bottomRows(agents);
  p.d_zu.topRows(agents).setIdentity();
  p.d_zy.block(0, 0, agents, agents) = -Matrix::Identity(agents, agents);
  p.d_zy.block(0, Eigen::Index(n) * agents, agents, agents) -= Matrix::Identity(agents, agents);
  p.c_out = Matrix::Zero(agents, dim);
  p.c_out.leftCols(agents).setIdentity();

  return close_interconnection(p, ordered, agents, n,
                               "multiplicative cascade xi_1..xi_" + std::to_string(n) +
                                   " then perturbation states");
}

std::vector<PerturbationBlock> random_blocks(int order, int agents,
                                             PerturbationMode mode,
                                             std::mt19937_64& rng,
                                             const RandomBlockOptions& options) {
  require(options.kappa > 0.0, "kappa must be positive");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<PerturbationBlock> out;
  for (int k = 0; k <= order; ++k) {
    if (unit(rng) < options.static_probability) {
      Matrix m(agents, agents);
      for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = gauss(rng);
      m = (0.5 * (m + m.transpose())).eval();
      const double norm = Eigen::SelfAdjointEigenSolver<Matrix>(m, Eigen::EigenvaluesOnly)
                              .eigenvalues()
                              .cwiseAbs()
                              .maxCoeff();
      const double target = options.kappa * unit(rng);
      if (norm > 0.0) m *= target / norm;
      out.push_back(static_block(m, k, mode));
    } else {
      Vector gains(agents), taus(agents);
      const double log_lo = std::log(options.min_time_constant);
      const double log_hi = std::log(options.max_time_constant);
      for (int i = 0; i < agents; ++i) {
        gains(i) = options.kappa * (2.0 * unit(rng) - 1.0);
        taus(i) = std::exp(log_lo + (log_hi - log_lo) * unit(rng));
      }
      out.push_back(lag_bank_block(gains, taus, k, mode));
    }
  }
  return out;
}

std::vector<double> declared_norms(const std::vector<PerturbationBlock>& blocks) {
  std::vector<double> norms(blocks.size(), 0.0);
  for (const PerturbationBlock& b : blocks) {
    require(b.index >= 0 && b.index < int(blocks.size()), "block index out of range");
    norms[b.index] = b.declared_norm;
  }
  return norms;
}

std::vector<PerturbationBlock> normalize_to_total(
    const std::vector<PerturbationBlock>& blocks, int order,
    PerturbationMode mode, double target) {
  const std::vector<double> norms = declared_norms(blocks);
  const double total = mode == PerturbationMode::kAdditive
                           ? additive_margin(order, norms).total
                           : multiplicative_margin(norms).total;
  require(total > 0.0, "cannot normalize an all-zero perturbation set");
  std::vector<PerturbationBlock> out;
  for (const PerturbationBlock& b : blocks) out.push_back(scaled(b, target / total));
  return out;
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) {
  // splitmix64 finalizer over the combined value.
  std::uint64_t z = root + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

struct Settled {
  SimulationTrace trace;
  ConsensusVerdict verdict;
  double horizon = 0.0;
};

// Simulates a stable loop from random chain states (perturbation states at
// rest) long enough for the slowest transient to shrink by about e^-40.
Settled settle(const LtiSystem& system, const SpectrumReport& report, int order,
               int agents, std::mt19937_64& rng, double epsilon, int steps) {
  Settled out;
  const double decay = -report.max_real_part_excluding_zeros;
  out.horizon = std::clamp(40.0 / decay, 20.0, 2e4);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector x0 = Vector::Zero(system.state_dim());
  for (Eigen::Index i = 0; i < Eigen::Index(order) * agents; ++i) x0(i) = gauss(rng);
  out.trace = simulate(system, x0, ReferenceSignal::zero(), out.horizon,
                       out.horizon / steps);
  out.verdict = consensus_verdict(out.trace, epsilon);
  return out;
}

RobustnessSample run_sample(const RobustnessSweepConfig& config, int id) {
  RobustnessSample sample;
  sample.id = id;
  std::mt19937_64 rng(derive_seed(config.seed, std::uint64_t(id)));
  const int n = static_cast<int>(config.scales.size());
  const int agents = static_cast<int>(config.laplacian.rows());

  auto blocks = random_blocks(n, agents, config.mode, rng, config.blocks);
  blocks = normalize_to_total(blocks, n, config.mode, config.target_total);
  const std::vector<double> norms = declared_norms(blocks);
  sample.total_margin = config.mode == PerturbationMode::kAdditive
                            ? additive_margin(n, norms).total
                            : multiplicative_margin(norms).total;

  std::vector<Matrix> laplacians;
  for (double p : config.scales) laplacians.push_back(p * config.laplacian);
  const LtiSystem system =
      config.mode == PerturbationMode::kAdditive
          ? assemble_perturbed_additive(expand_serial(laplacians), blocks)
          : assemble_perturbed_multiplicative(laplacians, blocks);

  const SpectrumReport report = spectrum(system);
  sample.stable = report.stable;
  if (!report.stable) return sample;

  const Settled settled = settle(system, report, n, agents, rng, config.epsilon,
                                 config.steps);
  sample.horizon = settled.horizon;
  sample.consensus = settled.verdict.consensus;
  for (const auto& t : settled.verdict.settling_times) {
    if (t && (!sample.min_settling_time || *t < *sample.min_settling_time)) {
      sample.min_settling_time = t;
    }
  }
  const SimulationTrace& trace = settled.trace;
  // Chain signals M_j xi_j at the final sample.
  const Vector last = trace.states.col(trace.states.cols() - 1);
  const std::vector<Matrix> chain =
      config.mode == PerturbationMode::kAdditive
          ? serial_chain(expand_serial(laplacians))
          : laplacians;
  for (int j = 0; j < n; ++j) {
    const Vector signal = chain[j] * last.segment(Eigen::Index(j) * agents, agents);
    sample.max_internal_signal =
        std::max(sample.max_internal_signal, signal.cwiseAbs().maxCoeff());
  }
  return sample;
}

}  // namespace

LagBankExperiment lag_bank_experiment(const Matrix& laplacian, double kappa,
                                      std::uint64_t seed, int steps) {
  require(kappa > 0.0, "kappa must be positive");
  const int agents = static_cast<int>(laplacian.rows());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  LagBankExperiment out;
  out.gains.resize(agents);
  out.time_constants.resize(agents);
  for (int i = 0; i < agents; ++i) {
    out.gains(i) = 2.0 * unit(rng) - 1.0;
    out.time_constants(i) = std::exp(std::log(0.1) + std::log(100.0) * unit(rng));
  }
  out.gains *= kappa / out.gains.cwiseAbs().maxCoeff();

  const PerturbationMode mode = PerturbationMode::kAdditive;
  const std::vector<PerturbationBlock> blocks{
      zero_block(agents, 0, mode), zero_block(agents, 1, mode),
      lag_bank_block(out.gains, out.time_constants, 2, mode)};
  out.margin = additive_margin(2, declared_norms(blocks));
  const LtiSystem system =
      assemble_perturbed_additive(serial_from_scalars(laplacian, {1.0, 1.0}), blocks);
  out.spectrum = spectrum(system);
  if (!out.spectrum.stable) return out;
  Settled settled = settle(system, out.spectrum, 2, agents, rng,
                           kDefaultConsensusEpsilon, steps);
  out.verdict = std::move(settled.verdict);
  out.horizon = settled.horizon;
  return out;
}

std::vector<RobustnessSample> robustness_sweep(const RobustnessSweepConfig& config) {
  require(config.samples >= 1, "need at least one sample");
  require(!config.scales.empty(), "need at least one Laplacian scale");
  require(config.steps >= 1, "need at least one step");
  std::vector<RobustnessSample> samples(config.samples);
  std::atomic<int> next{0};
  auto worker = [&]() {
    for (int i = next++; i < config.samples; i = next++) {
      try {
        samples[i] = run_sample(config, i);
      } catch (const std::exception& e) {
        samples[i].id = i;
        samples[i].error = e.what();
      }
    }
  };
  int threads = config.jobs > 0 ? config.jobs : int(std::thread::hardware_concurrency());
  threads = std::clamp(threads, 1, config.samples);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return samples;
}

}  // namespace sercon
