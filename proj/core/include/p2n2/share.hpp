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
#include <utility>

#include "p2n2/fixed.hpp"
#include "p2n2/rng.hpp"
#include "p2n2/roles.hpp"
#include "p2n2/session.hpp"

namespace p2n2 {

// One party's additive share of a ring matrix. The two payloads for a
// logical matrix sum (ring addition) to the plaintext encoding.
struct ShareMatrix {
  PartyId party = PartyId::A;
  FxMatrix payload;
  uint64_t session_tag = 0;
};

// Preprocessed multiplication material for one (m,k,n) matrix product.
// u/v/w hold this party's additive shares; globally U is m x k uniform,
// V is k x n uniform, and W is the raw ring product U*V. W is kept at the
// doubled fixed-point scale: mixing a pre-truncated W into the Beaver
// combination breaks down because the correction terms are unbounded in the
// ring, so the single truncation happens on the combined product shares.
struct BeaverTriple {
  FxMatrix u, v, w;
  size_t m = 0, k = 0, n = 0;
  uint64_t id = 0;
  bool consumed = false;
};

// Trusted-dealer triple source. Both parties construct providers from the
// same session seed and draw in lockstep, which emulates a dealer handing
// each party its half. Never re-issues: each triple carries a one-time id
// and the consuming operation marks it spent.
class TripleProvider {
 public:
  explicit TripleProvider(uint64_t seed, uint64_t capacity = UINT64_MAX);

  BeaverTriple issue(size_t m, size_t k, size_t n, PartyId me);
  uint64_t issued_count() const { return issued_; }
  uint64_t capacity() const { return capacity_; }

 private:
  Rng rng_;
  uint64_t issued_ = 0;
  uint64_t capacity_;
};

// Fills a matrix with uniform ring elements.
FxMatrix random_ring_matrix(size_t rows, size_t cols, Rng& rng);

// Splits m into two additive shares: payload_A uniform, payload_B = m - A.
std::pair<ShareMatrix, ShareMatrix> share(const FxMatrix& m, Rng& rng,
                                          uint64_t session_tag = 0);

// Entry-wise ring sum of the two shares of one logical matrix.
FxMatrix reconstruct(const ShareMatrix& a, const ShareMatrix& b);

// SecureML-style share-wise truncation by frac_bits. Party A shifts its
// share down; party B negates, shifts, negates. Off by at most one unit in
// the last place for bounded plaintexts.
FxMatrix truncate_share(const FxMatrix& share_payload, PartyId party, int frac_bits);

// One party's half of the Beaver product of two logically shared matrices.
// Opens E = X - U and F = Y - V, then combines locally. Returns this
// party's share of X*Y at the doubled scale (no truncation). Exactly one
// ShareBlock round trip (this side sends E and F, receives the peer's).
// a_speaks_first fixes the exchange order so the same code runs over
// strictly ordered transports.
FxMatrix beaver_matmul_raw(PartyId me, const FxMatrix& x_share, const FxMatrix& y_share,
                           BeaverTriple& triple, Link& peer);

// Truncated shared product: reconstructs to fx_matmul_trunc(X, Y) within one
// truncation unit per entry. Consumes the triple; two message rounds.
ShareMatrix shared_matmul(PartyId me, const ShareMatrix& x, const ShareMatrix& y,
                          BeaverTriple& triple, Link& peer, const FxConfig& cfg);

// Both data holders' halves of the first-hidden-layer pre-activation
// X*theta where X = [X_A | X_B] and theta = [theta_A ; theta_B]:
// 1-2. each party splits its X and theta blocks into additive shares,
// 3-4. exchanges the counterpart's halves,
// 5-6. forms concatenated shares and the local share product,
// 7.   computes both cross products with Beaver triples,
// 8-9. sums everything and truncates share-wise once.
// The returned share reconstructs to the encoding of X_A*theta_A +
// X_B*theta_B within one truncation unit per entry. Message count is a
// fixed constant (six frames each way) regardless of batch size.
ShareMatrix secure_first_layer(PartyId me, const FxMatrix& x_own,
                               const FxMatrix& theta_own, TripleProvider& provider,
                               Link& peer, const FxConfig& cfg, Rng& share_rng,
                               uint64_t session_tag = 0);

}  // namespace p2n2
