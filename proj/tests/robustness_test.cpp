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

#include <gtest/gtest.h>

#include <random>

#include <Eigen/Eigenvalues>

#include "oracles.hpp"
#include "sercon/graph.hpp"
#include "sercon/robustness.hpp"
#include "sercon/spectral.hpp"
#include "sercon/synthesis.hpp"
#include "test_util.hpp"

namespace sercon {
namespace {

constexpr PerturbationMode kAdd = PerturbationMode::kAdditive;
constexpr PerturbationMode kMul = PerturbationMode::kMultiplicative;

Matrix path_laplacian(int n) { return laplacian_of(make_family(FamilyKind::kPath, n)).matrix; }

double grid_factor(int n, int k, double lambda) {
  return oracle::grid_max(
      [&](double w) {
        return std::pow(w, k) * std::pow(lambda, n - k) /
               std::pow(std::abs(Complex(lambda, w)), n);
      },
      1e-4 * lambda, 1e4 * lambda, 400000);
}

TEST(AnalyticFactorTest, SpotValues) {
  EXPECT_NEAR(grid_factor(2, 1, 1.0), 0.5, 1e-6);
  EXPECT_NEAR(analytic_factor(2, 1), 0.5, 1e-15);
  EXPECT_NEAR(grid_factor(3, 1, 1.0), std::sqrt(4.0 / 27.0), 1e-6);
  EXPECT_NEAR(analytic_factor(3, 1), std::sqrt(4.0 / 27.0), 1e-15);
  for (int n = 1; n <= 6; ++n) {
    EXPECT_EQ(analytic_factor(n, 0), 1.0);
    EXPECT_EQ(analytic_factor(n, n), 1.0);
  }
  EXPECT_THROW(analytic_factor(2, 3), Error);
}

TEST(AnalyticFactorTest, MatchesGridForEveryLambda) {
  for (int n = 1; n <= 4; ++n) {
    for (int k = 0; k <= n; ++k) {
      for (double lambda : {0.1, 1.0, 10.0}) {
        const double grid = grid_factor(n, k, lambda);
        EXPECT_LT(std::abs(grid - analytic_factor(n, k)) / analytic_factor(n, k), 1e-4)
            << n << "," << k << "," << lambda;
      }
    }
  }
}

TEST(AnalyticFactorTest, MatrixNormOverSymmetricLaplacian) {
  // || s^k L^(n-k) (sI + L)^-n || is the max over nonzero eigenvalues.
  Eigen::SelfAdjointEigenSolver<Matrix> es(path_laplacian(5));
  const Vector lam = es.eigenvalues().tail(4);
  for (int n = 1; n <= 3; ++n) {
    for (int k = 0; k < n; ++k) {
      double peak = 0.0;
      for (Eigen::Index i = 0; i < lam.size(); ++i) {
        // Scalar form per eigenvalue: s^k lam^(n-k) / (s + lam)^n.
        std::vector<double> num(k + 1, 0.0), den{1.0};
        num[k] = std::pow(lam(i), n - k);
        for (int m = 0; m < n; ++m) {
          std::vector<double> next(den.size() + 1, 0.0);
          for (std::size_t j = 0; j < den.size(); ++j) {
            next[j] += lam(i) * den[j];
            next[j + 1] += den[j];
          }
          den = next;
        }
        peak = std::max(peak, hinf_norm_scalar(num, den));
      }
      EXPECT_NEAR(peak, analytic_factor(n, k), 1e-4 * analytic_factor(n, k));
    }
  }
}

TEST(HinfTest, Examples) {
  EXPECT_NEAR(hinf_norm(static_system(0.3 * Matrix::Identity(3, 3))), 0.3, 1e-15);
  for (double k : {0.9, -0.4}) {
    for (double tau : {0.1, 3.0}) {
      const PerturbationBlock b = lag_bank_block(Vector::Constant(1, k), Vector::Constant(1, tau), 0, kAdd);
      EXPECT_NEAR(hinf_norm(b.realization), std::abs(k), 1e-12);
    }
  }
  // L (sI + L)^-1 on the nonzero eigenspace of a symmetric L.
  const Matrix l = path_laplacian(6);
  Eigen::SelfAdjointEigenSolver<Matrix> es(l);
  const Matrix q = es.eigenvectors().rightCols(5);
  const Vector lam = es.eigenvalues().tail(5);
  LtiSystem s;
  s.a = -lam.asDiagonal().toDenseMatrix();
  s.b = q.transpose();
  s.c = q * lam.asDiagonal();
  s.d = Matrix::Zero(6, 6);
  EXPECT_NEAR(hinf_norm(s), 1.0, 1e-10);
}

TEST(HinfTest, ResonantPeakIsRefined) {
  // 1 / (s^2 + 0.02 s + 1): peak 1 / (2 zeta sqrt(1 - zeta^2)) with zeta = 0.01.
  const double zeta = 0.01;
  const double expected = 1.0 / (2.0 * zeta * std::sqrt(1.0 - zeta * zeta));
  const HinfEstimate e = [&] {
    LtiSystem s;
    s.a = (Matrix(2, 2) << 0, 1, -1, -2 * zeta).finished();
    s.b = (Matrix(2, 1) << 0, 1).finished();
    s.c = (Matrix(1, 2) << 1, 0).finished();
    s.d = Matrix::Zero(1, 1);
    return hinf_norm_estimate(s);
  }();
  EXPECT_LT(std::abs(e.norm - expected) / expected, 1e-4);
  EXPECT_NEAR(e.peak_frequency, std::sqrt(1.0 - 2.0 * zeta * zeta), 1e-3);
  EXPECT_NEAR(hinf_norm_scalar({1.0}, {1.0, 2 * zeta, 1.0}), e.norm, 1e-9);
}

TEST(HinfTest, RejectsUnstableSystems) {
  LtiSystem s = static_system(Matrix::Identity(1, 1));
  s.a = Matrix::Constant(1, 1, 0.5);
  s.b = s.c = Matrix::Identity(1, 1);
  try {
    hinf_norm(s);
    FAIL() << "expected rejection";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kPrecondition);
  }
  EXPECT_THROW(hinf_norm_scalar({1.0}, {0.0, 1.0}), Error);  // pole at 0
}

TEST(MarginTest, AdditiveExamples) {
  EXPECT_EQ(additive_margin(3, {0, 0, 0, 0}).total, 0.0);
  EXPECT_TRUE(additive_margin(3, {0, 0, 0, 0}).satisfied);
  const MarginReport over = additive_margin(2, {0.4, 0.5, 0.4});
  EXPECT_NEAR(over.total, 1.05, 1e-15);
  EXPECT_FALSE(over.satisfied);
  const MarginReport under = additive_margin(2, {0.3, 0.5, 0.3});
  EXPECT_NEAR(under.total, 0.85, 1e-15);
  EXPECT_TRUE(under.satisfied);
  EXPECT_EQ(under.weights, (std::vector<double>{1.0, 0.5, 1.0}));
  EXPECT_THROW(additive_margin(2, {0.1, 0.2}), Error);
  EXPECT_THROW(additive_margin(1, {0.1, -0.2}), Error);
}

TEST(MarginTest, MultiplicativeExamples) {
  EXPECT_TRUE(multiplicative_margin({0, 0, 0}).satisfied);
  EXPECT_FALSE(multiplicative_margin({0.6, 0.9, 0.9, 0.5}).satisfied);
  EXPECT_TRUE(multiplicative_margin({0.4, 0.99, 0.99, 0.5}).satisfied);
  EXPECT_FALSE(multiplicative_margin({0.0, 1.0, 0.0}).satisfied);
  EXPECT_NEAR(multiplicative_margin({0.4, 0.99, 0.5}).total, 0.99, 1e-15);
}

// ((sI + L)^n - sum_k d_k(s) s^k L^(n-k))^-1 for scalar blocks d_k(s) I.
ComplexMatrix additive_oracle(const Matrix& l, int n, const std::vector<Complex>& d, Complex s) {
  const Eigen::Index m = l.rows();
  const ComplexMatrix lc = l.cast<Complex>();
  const ComplexMatrix eye = ComplexMatrix::Identity(m, m);
  ComplexMatrix lhs = eye;
  for (int k = 0; k < n; ++k) lhs = lhs * (s * eye + lc);
  for (int k = 0; k <= n; ++k) {
    ComplexMatrix term = std::pow(s, k) * eye;
    for (int j = 0; j < n - k; ++j) term = term * lc;
    lhs -= d[k] * term;
  }
  return lhs.inverse();
}

TEST(AssembleAdditiveTest, ZeroBlocksReproduceNominal) {
  const Matrix l = path_laplacian(5);
  const SerialDesign d = serial_from_scalars(l, {1.0, 1.0, 1.0});
  std::vector<PerturbationBlock> blocks;
  for (int k = 0; k <= 3; ++k) blocks.push_back(zero_block(5, k, kAdd));
  const LtiSystem perturbed = assemble_perturbed_additive(d, blocks);
  const LtiSystem nominal = realize_serial(d);
  const ComplexVector a = spectrum(perturbed).eigenvalues;
  const ComplexVector b = spectrum(nominal).eigenvalues;
  EXPECT_LT(pairing_distance(a, b), 1e-7);
  const Complex z(0.3, 0.8);
  EXPECT_LT((transfer_function(perturbed, z) - transfer_function(nominal, z)).norm(), 1e-12);
}

TEST(AssembleAdditiveTest, StaticAndDynamicBlocksMatchOracle) {
  const Matrix l = path_laplacian(4);
  for (int n = 1; n <= 3; ++n) {
    std::vector<PerturbationBlock> blocks;
    std::vector<double> gains, taus;
    for (int k = 0; k <= n; ++k) {
      if (k % 2 == 0) {
        blocks.push_back(static_block(0.1 * (k + 1) * Matrix::Identity(4, 4), k, kAdd));
      } else {
        blocks.push_back(lag_bank_block(Vector::Constant(4, 0.2), Vector::Constant(4, 0.5 * k), k, kAdd));
      }
    }
    const LtiSystem sys = assemble_perturbed_additive(serial_from_scalars(l, std::vector<double>(n, 1.0)), blocks);
    for (const Complex z : {Complex(0.2, 0.7), Complex(1.5, -0.3), Complex(0.05, 2.0)}) {
      std::vector<Complex> d;
      for (int k = 0; k <= n; ++k) {
        d.push_back(k % 2 == 0 ? Complex(0.1 * (k + 1)) : 0.2 / (0.5 * k * z + 1.0));
      }
      const ComplexMatrix expected = additive_oracle(l, n, d, z);
      EXPECT_LT((transfer_function(sys, z) - expected).norm() / expected.norm(), 1e-9) << n;
    }
  }
}

TEST(AssembleAdditiveTest, EnforcesTheoremPreconditions) {
  const Matrix asym = laplacian_of(make_family(FamilyKind::kLeaderChain, 4)).matrix;
  std::vector<PerturbationBlock> blocks{zero_block(4, 0, kAdd), zero_block(4, 1, kAdd)};
  try {
    assemble_perturbed_additive(expand_serial({asym}), blocks);
    FAIL() << "expected rejection";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kPrecondition);
  }
  EXPECT_NO_THROW(assemble_perturbed_additive(expand_serial({asym}), blocks, true));

  const Matrix l = path_laplacian(4);
  std::vector<PerturbationBlock> three{zero_block(4, 0, kAdd), zero_block(4, 1, kAdd),
                                       zero_block(4, 2, kAdd)};
  EXPECT_THROW(assemble_perturbed_additive(serial_from_scalars(l, {1.0, 2.0}), three), Error);
  EXPECT_THROW(assemble_perturbed_additive(serial_from_scalars(l, {1.0, 1.0}), blocks), Error);

  Matrix disconnected = Matrix::Zero(4, 4);
  EXPECT_THROW(assemble_perturbed_additive(expand_serial({disconnected}), blocks), Error);
}

TEST(AssembleAdditiveTest, FirstOrderStaticSmallGain) {
  const Matrix l = path_laplacian(5);
  const std::vector<PerturbationBlock> blocks{
      static_block(0.45 * Matrix::Identity(5, 5), 0, kAdd),
      static_block(-0.5 * Matrix::Identity(5, 5), 1, kAdd)};
  EXPECT_TRUE(additive_margin(1, declared_norms(blocks)).satisfied);
  const LtiSystem sys = assemble_perturbed_additive(expand_serial({l}), blocks);
  EXPECT_TRUE(spectrum(sys).stable);
}

TEST(AssembleAdditiveTest, LagBankExperiment) {
  const LagBankExperiment e = lag_bank_experiment(path_laplacian(8), 0.9, 7);
  EXPECT_NEAR(e.gains.cwiseAbs().maxCoeff(), 0.9, 1e-15);
  EXPECT_TRUE(e.margin.satisfied);
  EXPECT_NEAR(e.margin.total, 0.9, 1e-15);
  EXPECT_TRUE(e.spectrum.stable);
  EXPECT_TRUE(e.verdict.consensus);
}

// X = [(s(I + D0) + M_n)(sI + M_{n-1}) ... (sI + M_1)]^-1 with M_k = (I + D_k) L_k.
ComplexMatrix multiplicative_oracle(const std::vector<Matrix>& ls, const std::vector<double>& d,
                                    Complex s) {
  const int n = static_cast<int>(ls.size());
  const Eigen::Index m = ls.front().rows();
  const ComplexMatrix eye = ComplexMatrix::Identity(m, m);
  ComplexMatrix lhs = s * (1.0 + d[0]) * eye + (1.0 + d[n]) * ls[n - 1].cast<Complex>();
  for (int k = n - 1; k >= 1; --k) lhs = lhs * (s * eye + (1.0 + d[k]) * ls[k - 1].cast<Complex>());
  return lhs.inverse();
}

TEST(AssembleMultiplicativeTest, StaticBlocksMatchOracle) {
  std::mt19937_64 rng(12);
  for (int n = 1; n <= 3; ++n) {
    std::vector<Matrix> ls;
    for (int k = 0; k < n; ++k) {
      ls.push_back(testutil::laplacian(testutil::random_spanning_weights(4, rng, 0.3, true)));
    }
    std::vector<double> d;
    std::vector<PerturbationBlock> blocks;
    for (int k = 0; k <= n; ++k) {
      d.push_back(0.1 * k - 0.15);
      blocks.push_back(static_block(d.back() * Matrix::Identity(4, 4), k, kMul));
    }
    const LtiSystem sys = assemble_perturbed_multiplicative(ls, blocks);
    for (const Complex z : {Complex(0.2, 0.7), Complex(1.5, -0.3)}) {
      const ComplexMatrix expected = multiplicative_oracle(ls, d, z);
      EXPECT_LT((transfer_function(sys, z) - expected).norm() / expected.norm(), 1e-9);
    }
    EXPECT_TRUE(spectrum(sys).stable);
  }
}

TEST(AssembleMultiplicativeTest, ZeroBlocksGiveNominalCascade) {
  std::mt19937_64 rng(13);
  std::vector<Matrix> ls;
  for (int k = 0; k < 3; ++k) {
    ls.push_back(testutil::laplacian(testutil::random_spanning_weights(5, rng, 0.3, true)));
  }
  std::vector<PerturbationBlock> blocks;
  for (int k = 0; k <= 3; ++k) blocks.push_back(zero_block(5, k, kMul));
  const LtiSystem sys = assemble_perturbed_multiplicative(ls, blocks);
  // The cascade lists factors from the output, so it matches the serial
  // realization of the reversed list.
  const LtiSystem nominal = realize_serial(expand_serial({ls[2], ls[1], ls[0]}));
  const Complex z(0.4, 0.9);
  EXPECT_LT((transfer_function(sys, z) - transfer_function(nominal, z)).norm(), 1e-12);
}

TEST(AssembleMultiplicativeTest, LagOnInnerFactor) {
  const Matrix l = path_laplacian(6);
  const std::vector<PerturbationBlock> blocks{
      zero_block(6, 0, kMul),
      lag_bank_block(Vector::Constant(6, 0.5), Vector::LinSpaced(6, 0.2, 4.0), 1, kMul),
      zero_block(6, 2, kMul)};
  EXPECT_TRUE(multiplicative_margin(declared_norms(blocks)).satisfied);
  const LtiSystem sys = assemble_perturbed_multiplicative({l, l}, blocks);
  EXPECT_TRUE(spectrum(sys).stable);
}

TEST(RandomBlocksTest, DeclaredNormsBoundTrueNorms) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 40; ++trial) {
    const auto blocks = random_blocks(2, 4, kAdd, rng, {0.8, 0.1, 10.0, 0.5});
    ASSERT_EQ(blocks.size(), 3u);
    for (const PerturbationBlock& b : blocks) {
      EXPECT_NO_THROW(validate_block(b, 4));
      EXPECT_GE(b.declared_norm, hinf_norm(b.realization) - 1e-8);
      EXPECT_LE(b.declared_norm, 0.8 + 1e-12);
    }
  }
}

TEST(RandomBlocksTest, NormalizationHitsTarget) {
  std::mt19937_64 rng(15);
  for (PerturbationMode mode : {kAdd, kMul}) {
    const auto blocks = normalize_to_total(random_blocks(3, 3, mode, rng), 3, mode, 0.99);
    const auto norms = declared_norms(blocks);
    const double total =
        mode == kAdd ? additive_margin(3, norms).total : multiplicative_margin(norms).total;
    EXPECT_NEAR(total, 0.99, 1e-12);
  }
}

TEST(RandomBlocksTest, DerivedSeedsDiffer) {
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
  EXPECT_EQ(derive_seed(5, 9), derive_seed(5, 9));
}

TEST(SweepTest, SmallGainSweeps) {
  for (PerturbationMode mode : {kAdd, kMul}) {
    RobustnessSweepConfig config;
    config.laplacian = path_laplacian(5);
    config.mode = mode;
    config.samples = 20;
    config.seed = 77;
    const auto samples = robustness_sweep(config);
    for (const RobustnessSample& s : samples) {
      EXPECT_TRUE(s.error.empty()) << s.error;
      EXPECT_NEAR(s.total_margin, 0.99, 1e-12);
      EXPECT_TRUE(s.stable);
      EXPECT_TRUE(s.consensus);
      EXPECT_LT(s.max_internal_signal, 1e-6);
    }
  }
}

TEST(SweepTest, DeterministicAcrossJobs) {
  RobustnessSweepConfig config;
  config.laplacian = path_laplacian(4);
  config.samples = 8;
  config.jobs = 1;
  const auto one = robustness_sweep(config);
  config.jobs = 3;
  const auto three = robustness_sweep(config);
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_EQ(one[i].total_margin, three[i].total_margin);
    EXPECT_EQ(one[i].min_settling_time, three[i].min_settling_time);
  }
}

}  // namespace
}  // namespace sercon
