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

#include "p2n2/tensor.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstring>

namespace p2n2 {

namespace {

using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CMap = Eigen::Map<const EMat>;
using MMap = Eigen::Map<EMat>;

CMap cmap(const Tensor& t) {
  return CMap(t.data(), static_cast<Eigen::Index>(t.rows()),
              static_cast<Eigen::Index>(t.cols()));
}

MMap mmap(Tensor& t) {
  return MMap(t.data(), static_cast<Eigen::Index>(t.rows()),
              static_cast<Eigen::Index>(t.cols()));
}

}  // namespace

bool Tensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void Tensor::require_finite(const char* what) const {
  P2N2_REQUIRE(all_finite(), NumericError, "non-finite entries in ", what);
}

Tensor Tensor::row(size_t r) const {
  P2N2_REQUIRE(r < rows_, ShapeError, "row index ", r, " out of ", rows_);
  Tensor out(1, cols_);
  std::memcpy(out.data(), data_.data() + r * cols_, cols_ * sizeof(double));
  return out;
}

Tensor Tensor::rows_subset(const std::vector<size_t>& idx) const {
  P2N2_REQUIRE(!idx.empty(), ShapeError, "rows_subset needs at least one index");
  Tensor out(idx.size(), cols_);
  for (size_t i = 0; i < idx.size(); ++i) {
    P2N2_REQUIRE(idx[i] < rows_, ShapeError, "row index ", idx[i], " out of ", rows_);
    std::memcpy(out.data() + i * cols_, data_.data() + idx[i] * cols_,
                cols_ * sizeof(double));
  }
  return out;
}

Tensor Tensor::cols_subset(const std::vector<size_t>& idx) const {
  P2N2_REQUIRE(!idx.empty(), ShapeError, "cols_subset needs at least one index");
  Tensor out(rows_, idx.size());
  for (size_t r = 0; r < rows_; ++r) {
    for (size_t i = 0; i < idx.size(); ++i) {
      P2N2_REQUIRE(idx[i] < cols_, ShapeError, "col index ", idx[i], " out of ", cols_);
      out.at(r, i) = at(r, idx[i]);
    }
  }
  return out;
}

Tensor Tensor::filled(size_t rows, size_t cols, double v) {
  Tensor t(rows, cols);
  for (auto& x : t.raw()) x = v;
  return t;
}

Tensor Tensor::identity(size_t n) {
  Tensor t(n, n);
  for (size_t i = 0; i < n; ++i) t.at(i, i) = 1.0;
  return t;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  P2N2_REQUIRE(a.cols() == b.rows(), ShapeError, "matmul inner dims: ", a.cols(),
               " vs ", b.rows());
  Tensor out(a.rows(), b.cols());
  mmap(out).noalias() = cmap(a) * cmap(b);
  return out;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  P2N2_REQUIRE(a.rows() == b.rows(), ShapeError, "matmul_tn outer dims: ", a.rows(),
               " vs ", b.rows());
  Tensor out(a.cols(), b.cols());
  mmap(out).noalias() = cmap(a).transpose() * cmap(b);
  return out;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  P2N2_REQUIRE(a.cols() == b.cols(), ShapeError, "matmul_nt inner dims: ", a.cols(),
               " vs ", b.cols());
  Tensor out(a.rows(), b.rows());
  mmap(out).noalias() = cmap(a) * cmap(b).transpose();
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  P2N2_REQUIRE(a.same_shape(b), ShapeError, "add shape mismatch");
  Tensor out(a.rows(), a.cols());
  for (size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] + b.data()[i];
  return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
  P2N2_REQUIRE(a.same_shape(b), ShapeError, "sub shape mismatch");
  Tensor out(a.rows(), a.cols());
  for (size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] - b.data()[i];
  return out;
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  P2N2_REQUIRE(a.same_shape(b), ShapeError, "hadamard shape mismatch");
  Tensor out(a.rows(), a.cols());
  for (size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] * b.data()[i];
  return out;
}

Tensor scale(const Tensor& a, double k) {
  Tensor out(a.rows(), a.cols());
  for (size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] * k;
  return out;
}

Tensor add_row_broadcast(const Tensor& a, const Tensor& bias) {
  P2N2_REQUIRE(bias.rows() == 1 && bias.cols() == a.cols(), ShapeError,
               "bias must be 1x", a.cols(), ", got ", bias.rows(), "x", bias.cols());
  Tensor out(a.rows(), a.cols());
  for (size_t r = 0; r < a.rows(); ++r) {
    for (size_t c = 0; c < a.cols(); ++c) out.at(r, c) = a.at(r, c) + bias.at(0, c);
  }
  return out;
}

Tensor col_sum(const Tensor& a) {
  Tensor out(1, a.cols());
  for (size_t r = 0; r < a.rows(); ++r) {
    for (size_t c = 0; c < a.cols(); ++c) out.at(0, c) += a.at(r, c);
  }
  return out;
}

Tensor transpose(const Tensor& a) {
  Tensor out(a.cols(), a.rows());
  for (size_t r = 0; r < a.rows(); ++r) {
    for (size_t c = 0; c < a.cols(); ++c) out.at(c, r) = a.at(r, c);
  }
  return out;
}

Tensor hcat(const Tensor& a, const Tensor& b) {
  P2N2_REQUIRE(a.rows() == b.rows(), ShapeError, "hcat row mismatch");
  Tensor out(a.rows(), a.cols() + b.cols());
  for (size_t r = 0; r < a.rows(); ++r) {
    std::memcpy(out.data() + r * out.cols(), a.data() + r * a.cols(),
                a.cols() * sizeof(double));
    std::memcpy(out.data() + r * out.cols() + a.cols(), b.data() + r * b.cols(),
                b.cols() * sizeof(double));
  }
  return out;
}

Tensor vcat(const Tensor& a, const Tensor& b) {
  P2N2_REQUIRE(a.cols() == b.cols(), ShapeError, "vcat col mismatch");
  Tensor out(a.rows() + b.rows(), a.cols());
  std::memcpy(out.data(), a.data(), a.size() * sizeof(double));
  std::memcpy(out.data() + a.size(), b.data(), b.size() * sizeof(double));
  return out;
}

double frobenius_norm(const Tensor& a) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a.data()[i] * a.data()[i];
  return std::sqrt(s);
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  P2N2_REQUIRE(a.same_shape(b), ShapeError, "max_abs_diff shape mismatch");
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = std::fabs(a.data()[i] - b.data()[i]);
    if (d > m) m = d;
  }
  return m;
}

}  // namespace p2n2
