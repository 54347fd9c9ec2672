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

#include "sercon/sparsity.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sercon {

BoolMatrix boolean_product(const BoolMatrix& a, const BoolMatrix& b) {
  require(a.cols() == b.rows(), "boolean product dimension mismatch");
  BoolMatrix out = BoolMatrix::Constant(a.rows(), b.cols(), false);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index k = 0; k < a.cols(); ++k) {
      if (!a(i, k)) continue;
      for (Eigen::Index j = 0; j < b.cols(); ++j) {
        if (b(k, j)) out(i, j) = true;
      }
    }
  }
  return out;
}

BoolMatrix support_of(const Matrix& m, double threshold) {
  return (m.array().abs() > threshold).matrix();
}

HopMask hop_mask(const Matrix& adjacency, int hops) {
  require(hops >= 0, "hop count must be nonnegative");
  require(adjacency.rows() == adjacency.cols(), "adjacency must be square");
  const Eigen::Index n = adjacency.rows();
  const BoolMatrix step = support_of(adjacency);
  BoolMatrix identity = BoolMatrix::Constant(n, n, false);
  identity.diagonal().setConstant(true);

  // R_{k+1} = I | W R_k; stops early once the reach set is saturated.
  BoolMatrix reach = identity;
  for (int k = 0; k < hops; ++k) {
    BoolMatrix next = boolean_product(step, reach);
    next = next.array() || identity.array();
    if (next == reach) break;
    reach = std::move(next);
  }
  return HopMask{std::move(reach), hops};
}

std::string ClassVerdict::describe() const {
  std::ostringstream out;
  switch (violation) {
    case ClassViolation::kNone:
      out << "member (||A||_inf = " << norm << ")";
      break;
    case ClassViolation::kSparsity:
      out << "sparsity violation at (" << row << ", " << col
          << "): entry " << value << " outside the hop mask";
      break;
    case ClassViolation::kRowSum:
      out << "row-sum violation at row " << row << ": sum " << value;
      break;
    case ClassViolation::kGain:
      out << "gain violation: ||A||_inf = " << value;
      break;
  }
  return out.str();
}

ClassVerdict in_class(const Matrix& a, const FeedbackClassSpec& spec) {
  require(spec.hops >= 0, "hop count must be nonnegative");
  require(spec.gain_bound > 0.0, "gain bound must be positive");
  require(a.rows() == a.cols(), "feedback matrix must be square");
  require(a.rows() == spec.adjacency.rows() &&
              spec.adjacency.rows() == spec.adjacency.cols(),
          "feedback matrix and adjacency sizes differ");

  ClassVerdict verdict;
  verdict.norm = inf_norm(a);

  const HopMask mask = hop_mask(spec.adjacency, spec.hops);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      if (!mask(i, j) && a(i, j) != 0.0) {
        verdict.member = false;
        verdict.violation = ClassViolation::kSparsity;
        verdict.row = i;
        verdict.col = j;
        verdict.value = a(i, j);
        return verdict;
      }
    }
  }

  const Vector row_sums = a.rowwise().sum();
  const double row_tol = kRowSumRelTol * verdict.norm;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    if (std::abs(row_sums(i)) > row_tol) {
      verdict.member = false;
      verdict.violation = ClassViolation::kRowSum;
      verdict.row = i;
      verdict.value = row_sums(i);
      return verdict;
    }
  }

  if (verdict.norm > spec.gain_bound * (1.0 + kGainSlack)) {
    verdict.member = false;
    verdict.violation = ClassViolation::kGain;
    verdict.value = verdict.norm;
  }
  return verdict;
}

namespace {

LemmaCheck check_closure(const Matrix& a1, int q1, double c1, const Matrix& a2,
                         int q2, double c2, const Matrix& adjacency,
                         const Matrix& combined, int q, double c) {
  LemmaCheck check;
  for (const auto& [a, qa, ca] : {std::tuple{&a1, q1, c1}, std::tuple{&a2, q2, c2}}) {
    ClassVerdict pre = in_class(*a, {adjacency, qa, ca});
    if (!pre.member) {
      check.outcome = LemmaOutcome::kPreconditionFailed;
      check.detail = pre;
      return check;
    }
  }
  ClassVerdict post = in_class(combined, {adjacency, q, c});
  if (!post.member) {
    check.outcome = LemmaOutcome::kCounterexample;
  }
  check.detail = post;
  return check;
}

}  // namespace

LemmaCheck check_sum_lemma(const Matrix& a1, int q1, double c1,
                           const Matrix& a2, int q2, double c2,
                           const Matrix& adjacency) {
  require(a1.rows() == a2.rows() && a1.cols() == a2.cols(),
          "summands differ in size");
  return check_closure(a1, q1, c1, a2, q2, c2, adjacency, a1 + a2,
                       std::max(q1, q2), c1 + c2);
}

LemmaCheck check_product_lemma(const Matrix& a1, int q1, double c1,
                               const Matrix& a2, int q2, double c2,
                               const Matrix& adjacency) {
  require(a1.cols() == a2.rows(), "factors differ in size");
  return check_closure(a1, q1, c1, a2, q2, c2, adjacency, a1 * a2, q1 + q2,
                       c1 * c2);
}

Matrix random_adjacency(int nodes, double edge_probability,
                        std::mt19937_64& rng) {
  std::bernoulli_distribution coin(edge_probability);
  Matrix w = Matrix::Zero(nodes, nodes);
  for (int i = 0; i < nodes; ++i) {
    for (int j = 0; j < nodes; ++j) {
      if (i != j && coin(rng)) w(i, j) = 1.0;
    }
  }
  return w;
}

Matrix random_class_member(const Matrix& adjacency, int hops,
                           std::mt19937_64& rng) {
  const HopMask mask = hop_mask(adjacency, hops);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Eigen::Index n = adjacency.rows();
  Matrix a = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double sum = 0.0;
    int count = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (mask(i, j)) {
        a(i, j) = gauss(rng);
        sum += a(i, j);
        ++count;
      }
    }
    const double mean = sum / count;  // the diagonal is always in the mask
    for (Eigen::Index j = 0; j < n; ++j) {
      if (mask(i, j)) a(i, j) -= mean;
    }
  }
  return a;
}

namespace {

struct LemmaTrial {
  Matrix adjacency;
  Matrix a1, a2;
  int q1, q2;
};

LemmaTrial draw_lemma_trial(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> size(2, 10);
  std::uniform_int_distribution<int> hop(0, 3);
  std::uniform_real_distribution<double> density(0.05, 0.5);
  LemmaTrial t;
  t.adjacency = random_adjacency(size(rng), density(rng), rng);
  t.q1 = hop(rng);
  t.q2 = hop(rng);
  t.a1 = random_class_member(t.adjacency, t.q1, rng);
  t.a2 = random_class_member(t.adjacency, t.q2, rng);
  return t;
}

template <typename Check>
RefutationSummary refute(int trials, std::uint64_t seed, Check check) {
  std::mt19937_64 rng(seed);
  RefutationSummary summary;
  for (int t = 0; t < trials; ++t) {
    const LemmaTrial trial = draw_lemma_trial(rng);
    // Tight gain bounds: c_i = ||A_i||_inf (or 1 for the zero matrix).
    const auto tight = [](const Matrix& a) {
      const double norm = inf_norm(a);
      return norm > 0.0 ? norm : 1.0;
    };
    const double c1 = tight(trial.a1);
    const double c2 = tight(trial.a2);
    const LemmaCheck result = check(trial.a1, trial.q1, c1, trial.a2,
                                    trial.q2, c2, trial.adjacency);
    ++summary.trials;
    if (result.outcome == LemmaOutcome::kPreconditionFailed) {
      ++summary.precondition_failures;
    } else if (result.outcome == LemmaOutcome::kCounterexample) {
      ++summary.counterexamples;
    }
  }
  return summary;
}

}  // namespace

RefutationSummary refute_sum_lemma(int trials, std::uint64_t seed) {
  return refute(trials, seed, check_sum_lemma);
}

RefutationSummary refute_product_lemma(int trials, std::uint64_t seed) {
  return refute(trials, seed, check_product_lemma);
}

RefutationSummary refute_support_soundness(int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> size(1, 12);
  std::uniform_real_distribution<double> density(0.0, 0.6);
  std::uniform_real_distribution<double> magnitude(0.1, 10.0);
  RefutationSummary summary;
  for (int t = 0; t < trials; ++t) {
    const int n = size(rng);
    // Nonnegative matrices with random support and positive entries on it.
    const Matrix mask_a = random_adjacency(n, density(rng), rng);
    const Matrix mask_b = random_adjacency(n, density(rng), rng);
    Matrix a = mask_a, b = mask_b;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      if (a(i) > 0.0) a(i) = magnitude(rng);
      if (b(i) > 0.0) b(i) = magnitude(rng);
    }
    const BoolMatrix real_support = support_of(a * b);
    const BoolMatrix bool_support =
        boolean_product(support_of(a), support_of(b));
    ++summary.trials;
    // Positive entries: the supports must coincide exactly.
    if (real_support != bool_support) {
      ++summary.counterexamples;
      continue;
    }
    // Signed entries on the same support: only containment is guaranteed.
    Matrix signed_a = a, signed_b = b;
    std::bernoulli_distribution flip(0.5);
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      if (flip(rng)) signed_a(i) = -signed_a(i);
      if (flip(rng)) signed_b(i) = -signed_b(i);
    }
    const BoolMatrix signed_support = support_of(signed_a * signed_b);
    if ((signed_support.array() && !bool_support.array()).any()) {
      ++summary.counterexamples;
    }
  }
  return summary;
}

}  // namespace sercon
