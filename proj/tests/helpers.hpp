// Copyright 2026 The P2N2 Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Test-only oracles, deliberately independent of the library's fast paths:
// nested-loop matrix products, central finite differences, and a coarse
// chi-square statistic.

#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "p2n2/rng.hpp"
#include "p2n2/tensor.hpp"

namespace testutil {

// Plain nested-loop product; the reference for every matmul in the library.
inline p2n2::Tensor naive_matmul(const p2n2::Tensor& a, const p2n2::Tensor& b) {
  p2n2::Tensor out(a.rows(), b.cols());
  for (size_t i = 0; i < a.rows(); ++i) {
    for (size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (size_t k = 0; k < a.cols(); ++k) s += a.at(i, k) * b.at(k, j);
      out.at(i, j) = s;
    }
  }
  return out;
}

// Central finite difference of f at x along one coordinate.
inline double central_diff(const std::function<double(double)>& f, double x,
                           double eps = 1e-5) {
  return (f(x + eps) - f(x - eps)) / (2.0 * eps);
}

// Relative error with an absolute floor for near-zero references.
inline double rel_err(double got, double want, double floor_abs = 1e-8) {
  const double denom = std::max(std::fabs(want), floor_abs);
  return std::fabs(got - want) / denom;
}

// Chi-square statistic of observed counts against a uniform expectation.
inline double chi_square_uniform(const std::vector<uint64_t>& counts) {
  double total = 0.0;
  for (uint64_t c : counts) total += static_cast<double>(c);
  const double expect = total / static_cast<double>(counts.size());
  double stat = 0.0;
  for (uint64_t c : counts) {
    const double d = static_cast<double>(c) - expect;
    stat += d * d / expect;
  }
  return stat;
}

// Two-sample chi-square over shared bins (homogeneity).
inline double chi_square_two_sample(const std::vector<uint64_t>& a,
                                    const std::vector<uint64_t>& b) {
  double stat = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double na = static_cast<double>(a[i]);
    const double nb = static_cast<double>(b[i]);
    if (na + nb == 0.0) continue;
    const double d = na - nb;
    stat += d * d / (na + nb);
  }
  return stat;
}

inline p2n2::Tensor random_tensor(size_t rows, size_t cols, p2n2::Rng& rng, double lo = -1.0,
                                  double hi = 1.0) {
  p2n2::Tensor t(rows, cols);
  for (auto& v : t.raw()) v = rng.uniform(lo, hi);
  return t;
}

}  // namespace testutil
