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

#include "p2n2/fixed.hpp"

#include <cmath>
#include <cstring>

#include "p2n2/tensor.hpp"

namespace p2n2 {

RingElem fx_encode(double x, const FxConfig& cfg) {
  P2N2_REQUIRE(std::isfinite(x), RangeError, "cannot encode non-finite value");
  P2N2_REQUIRE(std::fabs(x) <= cfg.mag_bound, RangeError,
               "value ", x, " exceeds mag_bound ", cfg.mag_bound);
  const double scaled = x * static_cast<double>(1ULL << cfg.frac_bits);
  // Round half away from zero so both parties encode identically.
  const double rounded = scaled >= 0.0 ? std::floor(scaled + 0.5) : std::ceil(scaled - 0.5);
  const int64_t signed_val = static_cast<int64_t>(rounded);
  return static_cast<uint64_t>(signed_val);
}

double fx_decode(RingElem e, const FxConfig& cfg) {
  const int64_t signed_val = static_cast<int64_t>(e);
  return static_cast<double>(signed_val) / static_cast<double>(1ULL << cfg.frac_bits);
}

FxMatrix fx_add(const FxMatrix& a, const FxMatrix& b) {
  P2N2_REQUIRE(a.same_shape(b), ShapeError, "fx_add shape mismatch: ", a.rows(), "x",
               a.cols(), " vs ", b.rows(), "x", b.cols());
  FxMatrix out(a.rows(), a.cols());
  for (size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] + b.data()[i];
  return out;
}

FxMatrix fx_sub(const FxMatrix& a, const FxMatrix& b) {
  P2N2_REQUIRE(a.same_shape(b), ShapeError, "fx_sub shape mismatch: ", a.rows(), "x",
               a.cols(), " vs ", b.rows(), "x", b.cols());
  FxMatrix out(a.rows(), a.cols());
  for (size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] - b.data()[i];
  return out;
}

FxMatrix fx_neg(const FxMatrix& a) {
  FxMatrix out(a.rows(), a.cols());
  for (size_t i = 0; i < a.size(); ++i) out.data()[i] = 0 - a.data()[i];
  return out;
}

FxMatrix fx_matmul_raw(const FxMatrix& a, const FxMatrix& b) {
  P2N2_REQUIRE(a.cols() == b.rows(), ShapeError, "fx_matmul inner dims: ", a.cols(),
               " vs ", b.rows());
  const size_t m = a.rows(), k = a.cols(), n = b.cols();
  FxMatrix out(m, n);
  // ikj order keeps the b row hot; u64 multiply-add vectorizes on avx512.
  for (size_t i = 0; i < m; ++i) {
    RingElem* out_row = out.data() + i * n;
    const RingElem* a_row = a.data() + i * k;
    for (size_t kk = 0; kk < k; ++kk) {
      const RingElem av = a_row[kk];
      const RingElem* b_row = b.data() + kk * n;
      for (size_t j = 0; j < n; ++j) out_row[j] += av * b_row[j];
    }
  }
  return out;
}

FxMatrix fx_shift_trunc(const FxMatrix& a, int frac_bits) {
  FxMatrix out(a.rows(), a.cols());
  for (size_t i = 0; i < a.size(); ++i) {
    out.data()[i] = static_cast<uint64_t>(static_cast<int64_t>(a.data()[i]) >> frac_bits);
  }
  return out;
}

FxMatrix fx_matmul_trunc(const FxMatrix& a, const FxMatrix& b, const FxConfig& cfg) {
  return fx_shift_trunc(fx_matmul_raw(a, b), cfg.frac_bits);
}

FxMatrix fx_encode_matrix(const Tensor& t, const FxConfig& cfg) {
  FxMatrix out(t.rows(), t.cols());
  for (size_t i = 0; i < t.size(); ++i) out.data()[i] = fx_encode(t.data()[i], cfg);
  return out;
}

Tensor fx_decode_matrix(const FxMatrix& m, const FxConfig& cfg) {
  Tensor out(m.rows(), m.cols());
  for (size_t i = 0; i < m.size(); ++i) out.data()[i] = fx_decode(m.data()[i], cfg);
  return out;
}

FxMatrix fx_hcat(const FxMatrix& a, const FxMatrix& b) {
  P2N2_REQUIRE(a.rows() == b.rows(), ShapeError, "fx_hcat row mismatch: ", a.rows(),
               " vs ", b.rows());
  FxMatrix out(a.rows(), a.cols() + b.cols());
  for (size_t r = 0; r < a.rows(); ++r) {
    std::memcpy(out.data() + r * out.cols(), a.data() + r * a.cols(),
                a.cols() * sizeof(RingElem));
    std::memcpy(out.data() + r * out.cols() + a.cols(), b.data() + r * b.cols(),
                b.cols() * sizeof(RingElem));
  }
  return out;
}

FxMatrix fx_vcat(const FxMatrix& a, const FxMatrix& b) {
  P2N2_REQUIRE(a.cols() == b.cols(), ShapeError, "fx_vcat col mismatch: ", a.cols(),
               " vs ", b.cols());
  FxMatrix out(a.rows() + b.rows(), a.cols());
  std::memcpy(out.data(), a.data(), a.size() * sizeof(RingElem));
  std::memcpy(out.data() + a.size(), b.data(), b.size() * sizeof(RingElem));
  return out;
}

FxMatrix fx_transpose(const FxMatrix& a) {
  FxMatrix out(a.cols(), a.rows());
  for (size_t r = 0; r < a.rows(); ++r) {
    for (size_t c = 0; c < a.cols(); ++c) out.at(c, r) = a.at(r, c);
  }
  return out;
}

}  // namespace p2n2
