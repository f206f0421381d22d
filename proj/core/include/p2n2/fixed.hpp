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

#include <cstdint>
#include <vector>

#include "p2n2/errors.hpp"

namespace p2n2 {

class Tensor;

// Fixed-point configuration for the ring Z_{2^64}. Reals are carried as
// round(x * 2^frac_bits), negative values in two's complement. mag_bound is
// the largest absolute plaintext value the encoding admits; keeping
// mag_bound * 2^frac_bits well below 2^62 leaves the headroom that makes the
// probabilistic share-wise truncation failure negligible.
struct FxConfig {
  int frac_bits = 16;
  double mag_bound = 1048576.0;  // 2^20

  void validate() const {
    P2N2_REQUIRE(frac_bits >= 1 && frac_bits <= 30, ConfigError,
                 "frac_bits must be in [1,30], got ", frac_bits);
    P2N2_REQUIRE(mag_bound > 0.0, ConfigError, "mag_bound must be positive");
    const double scaled = mag_bound * static_cast<double>(1ULL << frac_bits);
    P2N2_REQUIRE(scaled < 0x1.0p62, ConfigError,
                 "mag_bound * 2^frac_bits must stay below 2^62");
  }

  double resolution() const { return 1.0 / static_cast<double>(1ULL << frac_bits); }
};

// One ring element. All arithmetic wraps modulo 2^64; the unsigned carrier is
// reinterpreted as signed two's complement on decode.
using RingElem = uint64_t;

RingElem fx_encode(double x, const FxConfig& cfg);
double fx_decode(RingElem e, const FxConfig& cfg);

// Row-major matrix over Z_{2^64}.
class FxMatrix {
 public:
  FxMatrix() = default;
  FxMatrix(size_t rows, size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0) {
    P2N2_REQUIRE(rows > 0 && cols > 0, ShapeError,
                 "FxMatrix dims must be positive, got ", rows, "x", cols);
  }
  FxMatrix(size_t rows, size_t cols, std::vector<RingElem> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    P2N2_REQUIRE(data_.size() == rows * cols, ShapeError,
                 "FxMatrix data length ", data_.size(), " != ", rows, "*", cols);
  }

  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }
  size_t size() const { return data_.size(); }
  bool same_shape(const FxMatrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  RingElem& at(size_t r, size_t c) { return data_[r * cols_ + c]; }
  RingElem at(size_t r, size_t c) const { return data_[r * cols_ + c]; }
  RingElem* data() { return data_.data(); }
  const RingElem* data() const { return data_.data(); }

  bool operator==(const FxMatrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
  }

 private:
  size_t rows_ = 0, cols_ = 0;
  std::vector<RingElem> data_;
};

// Entry-wise ring ops (wrapping).
FxMatrix fx_add(const FxMatrix& a, const FxMatrix& b);
FxMatrix fx_sub(const FxMatrix& a, const FxMatrix& b);
FxMatrix fx_neg(const FxMatrix& a);

// Raw ring matrix product, no rescaling. If both operands carry scale f the
// result carries scale 2f.
FxMatrix fx_matmul_raw(const FxMatrix& a, const FxMatrix& b);

// Ring product followed by an arithmetic right shift of each signed entry by
// frac_bits; the plaintext reference for every shared multiplication here.
FxMatrix fx_matmul_trunc(const FxMatrix& a, const FxMatrix& b, const FxConfig& cfg);

// Arithmetic shift of every entry (signed), in place variants not needed.
FxMatrix fx_shift_trunc(const FxMatrix& a, int frac_bits);

// Encode/decode whole matrices against real-valued tensors.
FxMatrix fx_encode_matrix(const Tensor& t, const FxConfig& cfg);
Tensor fx_decode_matrix(const FxMatrix& m, const FxConfig& cfg);

// Column-wise concatenation [a | b] and row-wise stacking [a ; b].
FxMatrix fx_hcat(const FxMatrix& a, const FxMatrix& b);
FxMatrix fx_vcat(const FxMatrix& a, const FxMatrix& b);
FxMatrix fx_transpose(const FxMatrix& a);

}  // namespace p2n2
