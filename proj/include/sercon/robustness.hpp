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

#ifndef SERCON_ROBUSTNESS_HPP_
#define SERCON_ROBUSTNESS_HPP_

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sercon/common.hpp"
#include "sercon/simulation.hpp"
#include "sercon/spectral.hpp"
#include "sercon/synthesis.hpp"

namespace sercon {

enum class PerturbationMode { kAdditive, kMultiplicative };

std::string mode_name(PerturbationMode mode);
PerturbationMode parse_mode(const std::string& name);

// A stable N x N transfer matrix Delta_k with a declared H-infinity bound.
struct PerturbationBlock {
  LtiSystem realization;
  double declared_norm = 0.0;
  int index = 0;
  PerturbationMode mode = PerturbationMode::kAdditive;
};

PerturbationBlock zero_block(int agents, int index, PerturbationMode mode);

// Static gain; the declared norm is its spectral norm.
PerturbationBlock static_block(const Matrix& gain, int index,
                               PerturbationMode mode);

// diag(k_i / (T_i s + 1)); the declared norm is max |k_i|.
PerturbationBlock lag_bank_block(const Vector& gains, const Vector& time_constants,
                                 int index, PerturbationMode mode);

// Output scaled by `factor` (the declared norm scales with |factor|).
PerturbationBlock scaled(const PerturbationBlock& block, double factor);

// Hurwitz or static, square of size `agents`.
void validate_block(const PerturbationBlock& block, int agents);

// max_w |w^k l^(n-k) / (j w + l)^n| for l > 0:
// sqrt(k^k (n-k)^(n-k) / n^n) for 0 < k < n, and 1 for k in {0, n}.
double analytic_factor(int order, int k);

struct HinfEstimate {
  double norm = 0.0;
  double peak_frequency = 0.0;  // rad/s; infinity when the peak is D
};

inline constexpr double kHinfGridMin = 1e-4;
inline constexpr double kHinfGridMax = 1e4;
inline constexpr int kHinfGridPoints = 2000;

// Peak singular value of G(jw) on a log grid over [1e-4, 1e4] rad/s plus
// w = 0 and w = infinity, refined by golden-section search around the grid
// peak. Accuracy target: 1e-4 relative. Systems with any eigenvalue in the
// closed right half plane are rejected (kPrecondition).
HinfEstimate hinf_norm_estimate(const LtiSystem& system);
double hinf_norm(const LtiSystem& system);

// Scalar rational function num(s) / den(s), coefficients in ascending
// powers of s; den must be Hurwitz and deg num <= deg den.
double hinf_norm_scalar(const std::vector<double>& numerator,
                        const std::vector<double>& denominator);

struct MarginReport {
  PerturbationMode mode = PerturbationMode::kAdditive;
  int order = 0;
  std::vector<double> norms;    // ||Delta_0||..||Delta_n||
  std::vector<double> weights;  // analytic weight per term
  double total = 0.0;
  bool satisfied = false;
  bool requires_symmetric = true;
  std::string note;
};

// total = ||D_0|| + ||D_n|| + sum_{0<k<n} ||D_k|| analytic_factor(n, k);
// satisfied iff total < 1. Sufficient only.
MarginReport additive_margin(int order, const std::vector<double>& norms);

// satisfied iff every ||D_k|| < 1 (k = 1..n) and ||D_0|| + ||D_n|| < 1.
// total reports max(||D_0|| + ||D_n||, max_k ||D_k||).
MarginReport multiplicative_margin(const std::vector<double>& norms);

// Perturbed loop (sI + L)^n X = U_ref + sum_k Delta_k s^k L^(n-k) X with
// one block per k = 0..n. Every L_k must equal a common symmetric L whose
// graph has a spanning tree; otherwise kPrecondition is thrown unless
// `probe_asymmetric` is set. The s^k-weighted signals are read from the
// nominal chain (x^(k) = C A^k xi for k < n; s^n X from the input row), so
// the realization stays proper.
LtiSystem assemble_perturbed_additive(const SerialDesign& design,
                                      const std::vector<PerturbationBlock>& blocks,
                                      bool probe_asymmetric = false);

// Cascade xi_k' = -(I + D_k) L_k xi_k + xi_{k+1} for k < n and
// (I + D_0) xi_n' = -(I + D_n) L_n xi_n + u, with x = xi_1. The chain runs
// from the output (factor 1) to the input (factor n).
LtiSystem assemble_perturbed_multiplicative(
    const std::vector<Matrix>& laplacians,
    const std::vector<PerturbationBlock>& blocks,
    bool probe_asymmetric = false);

struct RandomBlockOptions {
  double kappa = 1.0;  // lag gains drawn from (-kappa, kappa)
  double min_time_constant = 0.1;
  double max_time_constant = 10.0;
  double static_probability = 0.5;  // otherwise a diagonal lag bank
};

// One random block per index 0..n: diagonal first-order lags or static
// symmetric matrices with norm drawn from (0, kappa).
std::vector<PerturbationBlock> random_blocks(int order, int agents,
                                             PerturbationMode mode,
                                             std::mt19937_64& rng,
                                             const RandomBlockOptions& options = {});

std::vector<double> declared_norms(const std::vector<PerturbationBlock>& blocks);

// Rescales every block by the same factor so the margin total hits
// `target`.
std::vector<PerturbationBlock> normalize_to_total(
    const std::vector<PerturbationBlock>& blocks, int order,
    PerturbationMode mode, double target);

// Derives an independent per-sample seed from a root seed.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index);

struct RobustnessSweepConfig {
  Matrix laplacian;  // symmetric; L_k = scales[k-1] * L
  std::vector<double> scales{1.0, 1.0};
  PerturbationMode mode = PerturbationMode::kAdditive;
  double target_total = 0.99;
  int samples = 100;
  std::uint64_t seed = 1;
  int jobs = 1;
  double epsilon = 1e-6;
  int steps = 2000;
  RandomBlockOptions blocks;
};

struct RobustnessSample {
  int id = 0;
  double total_margin = 0.0;
  bool stable = false;     // spectrum classification
  bool consensus = false;  // simulation verdict
  std::optional<double> min_settling_time;  // min over k
  double max_internal_signal = 0.0;  // multiplicative: max_k |L_k xi_k| at the end
  double horizon = 0.0;
  std::string error;
};

// Draws random block sets, normalizes them, assembles the perturbed loop,
// classifies its spectrum and simulates from a random initial state.
// Samples run on `jobs` threads with seeds derived from the root seed.
std::vector<RobustnessSample> robustness_sweep(const RobustnessSweepConfig& config);

struct LagBankExperiment {
  Vector gains;           // k_i, rescaled so max |k_i| = kappa
  Vector time_constants;  // T_i
  MarginReport margin;
  SpectrumReport spectrum;
  ConsensusVerdict verdict;
  double horizon = 0.0;
};

// Second-order serial loop (L_1 = L_2 = L) with a heterogeneous lag bank in
// the top additive block and zero blocks elsewhere.
LagBankExperiment lag_bank_experiment(const Matrix& laplacian, double kappa,
                                      std::uint64_t seed, int steps = 2000);

}  // namespace sercon

#endif  // SERCON_ROBUSTNESS_HPP_
