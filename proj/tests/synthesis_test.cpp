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

#include "oracles.hpp"
#include "sercon/graph.hpp"
#include "sercon/sparsity.hpp"
#include "sercon/synthesis.hpp"
#include "test_util.hpp"

namespace sercon {
namespace {

double rel_error(const Matrix& a, const Matrix& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

std::vector<Matrix> random_laplacians(int n, int agents, std::mt19937_64& rng) {
  std::vector<Matrix> out;
  for (int k = 0; k < n; ++k) {
    out.push_back(testutil::laplacian(testutil::random_spanning_weights(agents, rng)));
  }
  return out;
}

TEST(ExpandTest, FirstOrderIsTheLaplacian) {
  const Matrix l = laplacian_of(make_family(FamilyKind::kPath, 4)).matrix;
  const SerialDesign d = expand_serial({l});
  ASSERT_EQ(d.coefficients().size(), 1u);
  EXPECT_EQ(d.coefficients()[0], l);
}

TEST(ExpandTest, ThirdOrderTerms) {
  std::mt19937_64 rng(1);
  const auto ls = random_laplacians(3, 5, rng);
  const SerialDesign d = expand_serial(ls);
  const auto& a = d.coefficients();
  EXPECT_LT(rel_error(a[2], ls[0] + ls[1] + ls[2]), 1e-14);
  EXPECT_LT(rel_error(a[1], ls[0] * ls[1] + ls[0] * ls[2] + ls[1] * ls[2]), 1e-14);
  EXPECT_LT(rel_error(a[0], ls[0] * ls[1] * ls[2]), 1e-14);
}

TEST(ExpandTest, EqualFactorsGiveBinomialTerms) {
  const Matrix l = laplacian_of(make_family(FamilyKind::kDirectedCycle, 5)).matrix;
  const SerialDesign d = serial_from_scalars(l, {1.0, 1.0});
  EXPECT_LT(rel_error(d.coefficients()[1], 2.0 * l), 1e-15);
  EXPECT_LT(rel_error(d.coefficients()[0], l * l), 1e-15);
}

TEST(ExpandTest, MatchesSubsetFormula) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + trial % 4;
    const auto ls = random_laplacians(n, 2 + trial % 9, rng);
    const auto expected = oracle::subset_expansion(ls);
    const SerialDesign d = expand_serial(ls);
    for (int k = 0; k < n; ++k) EXPECT_LT(rel_error(d.coefficients()[k], expected[k]), 1e-12);
  }
}

TEST(ExpandTest, PolynomialIdentityAtRandomPoints) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> point(-3.0, 3.0);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 1 + trial % 4;
    const int agents = 2 + trial % 9;
    const auto ls = random_laplacians(n, agents, rng);
    const SerialDesign d = expand_serial(ls);
    for (int probe = 0; probe < 10; ++probe) {
      const double s = point(rng);
      Matrix product = Matrix::Identity(agents, agents);
      for (const Matrix& l : ls) product = product * (s * Matrix::Identity(agents, agents) + l);
      EXPECT_LT(rel_error(coefficient_polynomial(d.coefficients(), s), product), 1e-9);
    }
  }
}

TEST(ExpandTest, CoefficientsAnnihilateOnes) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 40; ++trial) {
    const auto ls = random_laplacians(1 + trial % 4, 3 + trial % 8, rng);
    const SerialDesign d = expand_serial(ls);
    for (const Matrix& a : d.coefficients()) {
      EXPECT_LE(a.rowwise().sum().cwiseAbs().maxCoeff(), 1e-10 * std::max(1.0, inf_norm(a)));
    }
  }
}

TEST(ExpandTest, RejectsBadInput) {
  EXPECT_THROW(expand_serial({}), Error);
  EXPECT_THROW(expand_serial({Matrix::Zero(2, 2), Matrix::Zero(3, 3)}), Error);
  EXPECT_THROW(expand_serial(std::vector<Matrix>(9, Matrix::Zero(2, 2))), Error);
}

TEST(GainBoundTest, Values) {
  EXPECT_DOUBLE_EQ(gain_bound(1, 2.0), 2.0);
  EXPECT_DOUBLE_EQ(gain_bound(3, 2.0), 24.0);
  EXPECT_DOUBLE_EQ(gain_bound(2, 1.0), 2.0);
  EXPECT_DOUBLE_EQ(gain_bound(4, 0.5), 6.0 * 0.5);
  EXPECT_DOUBLE_EQ(binomial(4, 2), 6.0);
}

TEST(RealizeTest, FirstOrder) {
  const Matrix l = laplacian_of(make_family(FamilyKind::kPath, 3)).matrix;
  const LtiSystem s = realize_serial(expand_serial({l}), true);
  EXPECT_EQ(s.a, -l);
  EXPECT_EQ(s.b, Matrix::Identity(3, 3));
  EXPECT_EQ(s.c, Matrix::Identity(3, 3));
  const LtiSystem c = realize_conventional(conventional_from_scalars(l, {1.0}));
  EXPECT_EQ(c.a, -l);
}

TEST(RealizeTest, SecondOrderBlocks) {
  Matrix l(2, 2);
  l << 1, -1, -1, 1;
  const LtiSystem s = realize_serial(expand_serial({l, l}), true);
  Matrix expected = Matrix::Zero(4, 4);
  expected.topLeftCorner(2, 2) = -l;
  expected.topRightCorner(2, 2).setIdentity();
  expected.bottomRightCorner(2, 2) = -l;
  EXPECT_EQ(s.a, expected);
}

TEST(RealizeTest, ConventionalCompanionRow) {
  const Matrix l = laplacian_of(make_family(FamilyKind::kLeaderChain, 4)).matrix;
  const LtiSystem s = realize_conventional(conventional_from_scalars(l, {2.0, 4.0, 6.0}));
  EXPECT_EQ(s.a.block(8, 0, 4, 4), -2.0 * l);
  EXPECT_EQ(s.a.block(8, 4, 4, 4), -4.0 * l);
  EXPECT_EQ(s.a.block(8, 8, 4, 4), -6.0 * l);
  EXPECT_EQ(s.a.block(0, 4, 4, 4), Matrix::Identity(4, 4));
}

TEST(RealizeTest, CycleSecondOrderForm) {
  // s^2 I + 2 p1 s L + p0 L
  const Matrix l = laplacian_of(make_family(FamilyKind::kDirectedCycle, 5)).matrix;
  const double p0 = 0.7, p1 = 1.3;
  const LtiSystem s = realize_conventional(conventional_from_scalars(l, {p0, 2.0 * p1}));
  const Complex z(0.4, 1.1);
  const ComplexMatrix expected =
      (z * z * ComplexMatrix::Identity(5, 5) + 2.0 * p1 * z * l.cast<Complex>() +
       p0 * l.cast<Complex>())
          .inverse();
  EXPECT_LT((transfer_function(s, z) - expected).norm(), 1e-12);
}

TEST(RealizeTest, SerialAndControllerTransferFunctionsAgree) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> part(-2.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 4;
    const int agents = 2 + trial % 6;
    const auto ls = random_laplacians(n, agents, rng);
    const SerialDesign d = expand_serial(ls);
    const LtiSystem serial = realize_serial(d, true);
    const LtiSystem conventional = realize_conventional(controller_of_serial(d));
    for (int probe = 0; probe < 5; ++probe) {
      const Complex z(part(rng), part(rng));
      ComplexMatrix product = ComplexMatrix::Identity(agents, agents);
      for (const Matrix& l : ls) {
        product = product * (z * ComplexMatrix::Identity(agents, agents) + l.cast<Complex>());
      }
      const ComplexMatrix expected = product.inverse();
      const double scale = std::max(1.0, expected.norm());
      EXPECT_LT((transfer_function(serial, z) - expected).norm() / scale, 1e-8);
      EXPECT_LT((transfer_function(conventional, z) - expected).norm() / scale, 1e-8);
    }
  }
}

TEST(ControllerTest, SecondOrderEqualFactors) {
  const Matrix l = laplacian_of(make_family(FamilyKind::kPath, 4)).matrix;
  const ConventionalDesign c = controller_of_serial(serial_from_scalars(l, {1.0, 1.0}));
  ASSERT_EQ(c.order(), 2);
  EXPECT_LT(rel_error(c.gains[0], l * l), 1e-15);
  EXPECT_LT(rel_error(c.gains[1], 2.0 * l), 1e-15);
}

TEST(LocalityTest, LeaderChainDesignPasses) {
  const auto g = make_family(FamilyKind::kLeaderChain, 12);
  const Matrix l = laplacian_of(g).matrix;
  const LocalityReport r = check_locality(serial_from_scalars(l, {2.0, 4.0, 6.0}), g.weights());
  EXPECT_TRUE(r.preconditions_hold());
  EXPECT_TRUE(r.all_pass());
  EXPECT_DOUBLE_EQ(r.c, 24.0);
  EXPECT_DOUBLE_EQ(r.c_prime, gain_bound(3, 24.0));
  EXPECT_EQ(r.hops, 3);
}

TEST(LocalityTest, CompleteGraphSecondOrderIsDenseButLocal) {
  const auto g = make_family(FamilyKind::kComplete, 5);
  const Matrix l = laplacian_of(g).matrix;
  const SerialDesign d = serial_from_scalars(l, {1.0, 1.0});
  EXPECT_TRUE((d.coefficients()[0].array() != 0.0).all());
  EXPECT_TRUE(check_locality(d, g.weights()).all_pass());
}

TEST(LocalityTest, RandomLaplacianListsPass) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    const int agents = 2 + trial % 9;
    const Matrix w = random_adjacency(agents, 0.3, rng);
    std::vector<Matrix> ls;
    for (int k = 0; k < 1 + trial % 4; ++k) {
      Matrix wk = w;
      std::uniform_real_distribution<double> scale(0.1, 2.0);
      for (Eigen::Index i = 0; i < wk.size(); ++i) wk(i) *= scale(rng);
      ls.push_back(testutil::laplacian(wk));
    }
    const LocalityReport r = check_locality(expand_serial(ls), w);
    EXPECT_TRUE(r.all_pass());
  }
}

TEST(LocalityTest, WrongGraphFails) {
  const Matrix l = laplacian_of(make_family(FamilyKind::kComplete, 4)).matrix;
  const Matrix sparse = make_family(FamilyKind::kPath, 4).weights();
  const LocalityReport r = check_locality(serial_from_scalars(l, {1.0}), sparse);
  EXPECT_FALSE(r.preconditions_hold());
  EXPECT_FALSE(r.all_pass());
}

}  // namespace
}  // namespace sercon
