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

#ifndef SERCON_SPARSITY_HPP_
#define SERCON_SPARSITY_HPP_

#include <cstdint>
#include <random>
#include <string>

#include "sercon/common.hpp"

namespace sercon {

// Support of sum_{k=0}^{q} W^k, computed over the boolean semiring.
struct HopMask {
  BoolMatrix reach;
  int hops = 0;

  bool operator()(Eigen::Index i, Eigen::Index j) const { return reach(i, j); }
};

HopMask hop_mask(const Matrix& adjacency, int hops);

// Boolean matrix product: (a * b)(i, j) = OR_k a(i, k) AND b(k, j).
BoolMatrix boolean_product(const BoolMatrix& a, const BoolMatrix& b);

// Entries with |m(i, j)| > threshold.
BoolMatrix support_of(const Matrix& m, double threshold = 0.0);

// Membership data for the class of q-step implementable relative feedback
// matrices with gain bound c.
struct FeedbackClassSpec {
  Matrix adjacency;
  int hops = 1;
  double gain_bound = 1.0;
};

enum class ClassViolation { kNone, kSparsity, kRowSum, kGain };

struct ClassVerdict {
  bool member = true;
  ClassViolation violation = ClassViolation::kNone;
  Eigen::Index row = -1;
  Eigen::Index col = -1;
  double value = 0.0;  // offending entry, row sum or norm
  double norm = 0.0;   // ||A||_inf

  std::string describe() const;
};

// Relative row-sum tolerance and gain slack used by the membership test.
inline constexpr double kRowSumRelTol = 1e-10;
inline constexpr double kGainSlack = 1e-12;

ClassVerdict in_class(const Matrix& a, const FeedbackClassSpec& spec);

enum class LemmaOutcome { kHolds, kPreconditionFailed, kCounterexample };

struct LemmaCheck {
  LemmaOutcome outcome = LemmaOutcome::kHolds;
  ClassVerdict detail;  // the failing verdict, if any

  bool holds() const { return outcome == LemmaOutcome::kHolds; }
};

// Closure under addition: A1 + A2 in class(max(q1, q2), c1 + c2).
LemmaCheck check_sum_lemma(const Matrix& a1, int q1, double c1,
                           const Matrix& a2, int q2, double c2,
                           const Matrix& adjacency);

// Closure under multiplication: A1 A2 in class(q1 + q2, c1 c2).
LemmaCheck check_product_lemma(const Matrix& a1, int q1, double c1,
                               const Matrix& a2, int q2, double c2,
                               const Matrix& adjacency);

// Random element of class(q, ||A||_inf): a Gaussian matrix masked to the
// q-hop support with each row re-centred over its support.
Matrix random_class_member(const Matrix& adjacency, int hops,
                           std::mt19937_64& rng);

// Random binary adjacency with the given edge probability (no self loops).
Matrix random_adjacency(int nodes, double edge_probability,
                        std::mt19937_64& rng);

struct RefutationSummary {
  int trials = 0;
  int precondition_failures = 0;
  int counterexamples = 0;
};

// Searches for counterexamples to the sum and product closure lemmas over
// random graphs and class members.
RefutationSummary refute_sum_lemma(int trials, std::uint64_t seed);
RefutationSummary refute_product_lemma(int trials, std::uint64_t seed);

// Support soundness for nonnegative products: supp(A B) over the reals is
// contained in the boolean product of the supports, with equality when the
// masked entries are strictly positive.
RefutationSummary refute_support_soundness(int trials, std::uint64_t seed);

}  // namespace sercon

#endif  // SERCON_SPARSITY_HPP_
