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

#ifndef SERCON_TESTS_TEST_UTIL_HPP_
#define SERCON_TESTS_TEST_UTIL_HPP_

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace testutil {

using Matrix = Eigen::MatrixXd;

// Random weighted adjacency (W(i, j) > 0: edge j -> i) that contains a
// spanning out-tree from a random root, plus extra random edges.
inline Matrix random_spanning_weights(int n, std::mt19937_64& rng, double extra = 0.2,
                                      bool symmetric = false) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  Matrix w = Matrix::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const int parent = order[std::size_t(unit(rng) * k)];
    w(order[k], parent) = 0.2 + unit(rng);
  }
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j && unit(rng) < extra) w(i, j) = 0.2 + unit(rng);
    }
  }
  if (symmetric) w = (0.5 * (w + w.transpose())).eval();
  return w;
}

inline Matrix laplacian(const Matrix& w) {
  Matrix l = -w;
  l.diagonal() = w.rowwise().sum();
  return l;
}

}  // namespace testutil

#endif  // SERCON_TESTS_TEST_UTIL_HPP_
