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

#include "p2n2/share.hpp"

namespace p2n2 {

TripleProvider::TripleProvider(uint64_t seed, uint64_t capacity)
    : rng_(derive_seed(seed, "beaver-dealer")), capacity_(capacity) {}

FxMatrix random_ring_matrix(size_t rows, size_t cols, Rng& rng) {
  FxMatrix m(rows, cols);
  for (size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.next_u64();
  return m;
}

BeaverTriple TripleProvider::issue(size_t m, size_t k, size_t n, PartyId me) {
  P2N2_REQUIRE(issued_ < capacity_, ResourceError,
               "triple provider exhausted after ", issued_, " triples");
  P2N2_REQUIRE(m > 0 && k > 0 && n > 0, ShapeError, "triple dims must be positive");

  // Dealer view: full U, V, raw product W, then fresh shares of each. Both
  // parties replay the same stream, so the halves are consistent.
  FxMatrix u_full = random_ring_matrix(m, k, rng_);
  FxMatrix v_full = random_ring_matrix(k, n, rng_);
  FxMatrix w_full = fx_matmul_raw(u_full, v_full);
  FxMatrix u_a = random_ring_matrix(m, k, rng_);
  FxMatrix v_a = random_ring_matrix(k, n, rng_);
  FxMatrix w_a = random_ring_matrix(m, n, rng_);

  BeaverTriple t;
  t.m = m;
  t.k = k;
  t.n = n;
  t.id = issued_++;
  if (me == PartyId::A) {
    t.u = std::move(u_a);
    t.v = std::move(v_a);
    t.w = std::move(w_a);
  } else {
    t.u = fx_sub(u_full, u_a);
    t.v = fx_sub(v_full, v_a);
    t.w = fx_sub(w_full, w_a);
  }
  return t;
}

std::pair<ShareMatrix, ShareMatrix> share(const FxMatrix& m, Rng& rng,
                                          uint64_t session_tag) {
  FxMatrix a = random_ring_matrix(m.rows(), m.cols(), rng);
  FxMatrix b = fx_sub(m, a);
  return {ShareMatrix{PartyId::A, std::move(a), session_tag},
          ShareMatrix{PartyId::B, std::move(b), session_tag}};
}

FxMatrix reconstruct(const ShareMatrix& a, const ShareMatrix& b) {
  P2N2_REQUIRE(a.party != b.party, ProtocolError,
               "reconstruct needs shares from both parties");
  P2N2_REQUIRE(a.session_tag == b.session_tag, ProtocolError,
               "reconstruct across sessions: tag ", a.session_tag, " vs ",
               b.session_tag);
  P2N2_REQUIRE(a.payload.same_shape(b.payload), ShapeError,
               "reconstruct shape mismatch: ", a.payload.rows(), "x", a.payload.cols(),
               " vs ", b.payload.rows(), "x", b.payload.cols());
  return fx_add(a.payload, b.payload);
}

FxMatrix truncate_share(const FxMatrix& share_payload, PartyId party, int frac_bits) {
  FxMatrix out(share_payload.rows(), share_payload.cols());
  if (party == PartyId::A) {
    for (size_t i = 0; i < out.size(); ++i) {
      out.data()[i] = share_payload.data()[i] >> frac_bits;
    }
  } else {
    for (size_t i = 0; i < out.size(); ++i) {
      out.data()[i] = 0 - ((0 - share_payload.data()[i]) >> frac_bits);
    }
  }
  return out;
}

FxMatrix beaver_matmul_raw(PartyId me, const FxMatrix& x_share, const FxMatrix& y_share,
                           BeaverTriple& triple, Link& peer) {
  P2N2_REQUIRE(!triple.consumed, ResourceError, "beaver triple ", triple.id,
               " already consumed");
  P2N2_REQUIRE(x_share.rows() == triple.m && x_share.cols() == triple.k, ShapeError,
               "x share ", x_share.rows(), "x", x_share.cols(), " does not fit triple (",
               triple.m, ",", triple.k, ",", triple.n, ")");
  P2N2_REQUIRE(y_share.rows() == triple.k && y_share.cols() == triple.n, ShapeError,
               "y share ", y_share.rows(), "x", y_share.cols(), " does not fit triple (",
               triple.m, ",", triple.k, ",", triple.n, ")");
  triple.consumed = true;

  const FxMatrix e_mine = fx_sub(x_share, triple.u);
  const FxMatrix f_mine = fx_sub(y_share, triple.v);

  FxMatrix e_theirs, f_theirs;
  if (me == PartyId::A) {
    peer.send_ring(MsgKind::ShareBlock, e_mine);
    peer.send_ring(MsgKind::ShareBlock, f_mine);
    e_theirs = peer.recv_ring(MsgKind::ShareBlock);
    f_theirs = peer.recv_ring(MsgKind::ShareBlock);
  } else {
    e_theirs = peer.recv_ring(MsgKind::ShareBlock);
    f_theirs = peer.recv_ring(MsgKind::ShareBlock);
    peer.send_ring(MsgKind::ShareBlock, e_mine);
    peer.send_ring(MsgKind::ShareBlock, f_mine);
  }

  const FxMatrix e_open = fx_add(e_mine, e_theirs);
  const FxMatrix f_open = fx_add(f_mine, f_theirs);

  // z_i = w_i + E*v_i + u_i*F, plus the public E*F once (on A's side).
  FxMatrix z = fx_add(triple.w, fx_add(fx_matmul_raw(e_open, triple.v),
                                       fx_matmul_raw(triple.u, f_open)));
  if (me == PartyId::A) z = fx_add(z, fx_matmul_raw(e_open, f_open));
  return z;
}

ShareMatrix shared_matmul(PartyId me, const ShareMatrix& x, const ShareMatrix& y,
                          BeaverTriple& triple, Link& peer, const FxConfig& cfg) {
  P2N2_REQUIRE(x.party == me && y.party == me, ProtocolError,
               "shared_matmul called with another party's shares");
  P2N2_REQUIRE(x.session_tag == y.session_tag, ProtocolError,
               "shared_matmul across sessions");
  FxMatrix raw = beaver_matmul_raw(me, x.payload, y.payload, triple, peer);
  return ShareMatrix{me, truncate_share(raw, me, cfg.frac_bits), x.session_tag};
}

ShareMatrix secure_first_layer(PartyId me, const FxMatrix& x_own,
                               const FxMatrix& theta_own, TripleProvider& provider,
                               Link& peer, const FxConfig& cfg, Rng& share_rng,
                               uint64_t session_tag) {
  P2N2_REQUIRE(theta_own.rows() == x_own.cols(), ShapeError,
               "first layer: theta rows ", theta_own.rows(), " != feature cols ",
               x_own.cols());

  // Steps 1-2: split own feature and parameter blocks.
  auto [x_1, x_2] = share(x_own, share_rng, session_tag);
  auto [t_1, t_2] = share(theta_own, share_rng, session_tag);

  // Steps 3-4: hand the counterpart its halves. A keeps index 1, B index 2.
  FxMatrix x_peer, t_peer;
  if (me == PartyId::A) {
    peer.send_ring(MsgKind::ShareBlock, x_2.payload);
    peer.send_ring(MsgKind::ShareBlock, t_2.payload);
    x_peer = peer.recv_ring(MsgKind::ShareBlock);
    t_peer = peer.recv_ring(MsgKind::ShareBlock);
  } else {
    x_peer = peer.recv_ring(MsgKind::ShareBlock);
    t_peer = peer.recv_ring(MsgKind::ShareBlock);
    peer.send_ring(MsgKind::ShareBlock, x_1.payload);
    peer.send_ring(MsgKind::ShareBlock, t_1.payload);
  }

  P2N2_REQUIRE(x_peer.rows() == x_own.rows(), ShapeError,
               "batch size mismatch between holders: ", x_own.rows(), " vs ",
               x_peer.rows());
  P2N2_REQUIRE(t_peer.cols() == theta_own.cols(), ShapeError,
               "hidden dim mismatch between holders: ", theta_own.cols(), " vs ",
               t_peer.cols());

  // Steps 5-6: concatenated shares, feature blocks side by side as
  // [X_A | X_B], parameter blocks stacked as [theta_A ; theta_B].
  const FxMatrix& x_mine = (me == PartyId::A) ? x_1.payload : x_2.payload;
  const FxMatrix& t_mine = (me == PartyId::A) ? t_1.payload : t_2.payload;
  FxMatrix x_cat = (me == PartyId::A) ? fx_hcat(x_mine, x_peer) : fx_hcat(x_peer, x_mine);
  FxMatrix t_cat = (me == PartyId::A) ? fx_vcat(t_mine, t_peer) : fx_vcat(t_peer, t_mine);

  const size_t m = x_cat.rows(), k = x_cat.cols(), n = t_cat.cols();

  // Local diagonal term <X>_i * <theta>_i at the doubled scale.
  FxMatrix z = fx_matmul_raw(x_cat, t_cat);

  // Step 7: cross terms <X>_1*<theta>_2 and <X>_2*<theta>_1. Each is a
  // product of two privately held matrices, shared degenerately (holder's
  // share is the value, the other side contributes zero).
  const FxMatrix zero_x(m, k);
  const FxMatrix zero_t(k, n);

  BeaverTriple tri1 = provider.issue(m, k, n, me);
  BeaverTriple tri2 = provider.issue(m, k, n, me);
  FxMatrix cross1 = (me == PartyId::A)
                        ? beaver_matmul_raw(me, x_cat, zero_t, tri1, peer)
                        : beaver_matmul_raw(me, zero_x, t_cat, tri1, peer);
  FxMatrix cross2 = (me == PartyId::A)
                        ? beaver_matmul_raw(me, zero_x, t_cat, tri2, peer)
                        : beaver_matmul_raw(me, x_cat, zero_t, tri2, peer);

  // Steps 8-9: sum all scale-2f terms, then truncate the share once.
  z = fx_add(z, fx_add(cross1, cross2));
  return ShareMatrix{me, truncate_share(z, me, cfg.frac_bits), session_tag};
}

}  // namespace p2n2
