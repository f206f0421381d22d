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

#pragma once

#include <cstddef>
#include <vector>

#include "p2n2/errors.hpp"

namespace p2n2 {

// Dense row-major real matrix. Plaintext neural-net state lives in these.
class Tensor {
 public:
  Tensor() = default;
  Tensor(size_t rows, size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {
    P2N2_REQUIRE(rows > 0 && cols > 0, ShapeError,
                 "Tensor dims must be positive, got ", rows, "x", cols);
  }
  Tensor(size_t rows, size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    P2N2_REQUIRE(data_.size() == rows * cols, ShapeError,
                 "Tensor data length ", data_.size(), " != ", rows, "*", cols);
  }

  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  bool same_shape(const Tensor& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  double& at(size_t r, size_t c) { return data_[r * cols_ + c]; }
  double at(size_t r, size_t c) const { return data_[r * cols_ + c]; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& raw() { return data_; }
  const std::vector<double>& raw() const { return data_; }

  bool operator==(const Tensor& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
  }

  bool all_finite() const;
  // Throws NumericError naming `what` if any entry is NaN/Inf.
  void require_finite(const char* what) const;

  Tensor row(size_t r) const;
  Tensor rows_subset(const std::vector<size_t>& idx) const;
  Tensor cols_subset(const std::vector<size_t>& idx) const;

  static Tensor zeros(size_t rows, size_t cols) { return Tensor(rows, cols); }
  static Tensor filled(size_t rows, size_t cols, double v);
  static Tensor identity(size_t n);

 private:
  size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

// a * b
Tensor matmul(const Tensor& a, const Tensor& b);
// a^T * b
Tensor matmul_tn(const Tensor& a, const Tensor& b);
// a * b^T
Tensor matmul_nt(const Tensor& a, const Tensor& b);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor hadamard(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double k);
// out[r,c] = a[r,c] + bias[0,c]
Tensor add_row_broadcast(const Tensor& a, const Tensor& bias);
// 1 x cols sums over rows
Tensor col_sum(const Tensor& a);
Tensor transpose(const Tensor& a);
Tensor hcat(const Tensor& a, const Tensor& b);
Tensor vcat(const Tensor& a, const Tensor& b);

double frobenius_norm(const Tensor& a);
double max_abs_diff(const Tensor& a, const Tensor& b);

}  // namespace p2n2
