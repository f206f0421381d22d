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

#include <doctest.h>

#include <future>
#include <thread>

#include "helpers.hpp"
#include "p2n2/share.hpp"

using namespace p2n2;

namespace {

// Drives both parties of a two-party protocol over a loopback pair.
template <typename FA, typename FB>
auto run_pair(FA&& fa, FB&& fb) {
  auto [ca, cb] = make_loopback_pair();
  Link la(ca, SessionId{});
  Link lb(cb, SessionId{});
  auto fut_b = std::async(std::launch::async, [&] { return fb(lb); });
  auto res_a = fa(la);
  return std::make_pair(std::move(res_a), fut_b.get());
}

}  // namespace

TEST_SUITE_BEGIN("share");

TEST_CASE("shares of zero are ring negations") {
  Rng rng(5);
  FxMatrix zero(2, 2);
  auto [sa, sb] = share(zero, rng);
  for (size_t i = 0; i < zero.size(); ++i) {
    CHECK(sa.payload.data()[i] + sb.payload.data()[i] == 0);
  }
}

TEST_CASE("reconstruct inverts share") {
  Rng rng(6);
  FxConfig cfg;
  for (int trial = 0; trial < 100; ++trial) {
    Tensor t = testutil::random_tensor(3, 2, rng, -50.0, 50.0);
    const FxMatrix m = fx_encode_matrix(t, cfg);
    auto [sa, sb] = share(m, rng);
    CHECK(reconstruct(sa, sb) == m);
  }
}

TEST_CASE("reconstruct guards") {
  Rng rng(7);
  FxMatrix m(2, 2);
  auto [sa, sb] = share(m, rng, 42);
  auto [sc, sd] = share(m, rng, 43);
  SUBCASE("session tag mismatch") {
    CHECK_THROWS_AS(reconstruct(sa, sd), ProtocolError);
  }
  SUBCASE("same party twice") {
    CHECK_THROWS_AS(reconstruct(sa, sc), ProtocolError);
  }
  SUBCASE("shape mismatch") {
    FxMatrix n(2, 3);
    auto [se, sf] = share(n, rng, 42);
    CHECK_THROWS_AS(reconstruct(sa, sf), ShapeError);
  }
}

TEST_CASE("sharing is additive") {
  // reconstruct(a+c, b+d) == reconstruct(a,b) + reconstruct(c,d), exactly.
  Rng rng(55);
  FxConfig cfg;
  for (int trial = 0; trial < 50; ++trial) {
    const Tensor m1 = testutil::random_tensor(3, 3, rng, -20.0, 20.0);
    const Tensor m2 = testutil::random_tensor(3, 3, rng, -20.0, 20.0);
    auto [a, b] = share(fx_encode_matrix(m1, cfg), rng);
    auto [c, d] = share(fx_encode_matrix(m2, cfg), rng);
    const ShareMatrix sum_a{PartyId::A, fx_add(a.payload, c.payload), 0};
    const ShareMatrix sum_b{PartyId::B, fx_add(b.payload, d.payload), 0};
    CHECK(reconstruct(sum_a, sum_b) ==
          fx_add(reconstruct(a, b), reconstruct(c, d)));
  }
}

TEST_CASE("share randomness is unbiased in both halves") {
  // 10,000 sharings of one fixed matrix; bin the high and low 32-bit halves
  // of one payload entry and chi-square against uniform. Seeded, so the
  // statistic is deterministic; the threshold sits far above the df=15 mean.
  Rng rng(8);
  FxConfig cfg;
  FxMatrix m(1, 1);
  m.at(0, 0) = fx_encode(1.25, cfg);
  constexpr size_t kBins = 16;
  std::vector<uint64_t> high_counts(kBins, 0), low_counts(kBins, 0);
  for (int i = 0; i < 10000; ++i) {
    auto [sa, sb] = share(m, rng);
    const uint64_t v = sa.payload.at(0, 0);
    high_counts[(v >> 60) & 0xf] += 1;
    low_counts[(v >> 28) & 0xf] += 1;
  }
  // df = 15: mean 15, sd sqrt(30); 15 + 5 sd ~ 42.
  CHECK(testutil::chi_square_uniform(high_counts) < 42.0);
  CHECK(testutil::chi_square_uniform(low_counts) < 42.0);
}

TEST_CASE("triple provider issues consistent halves and enforces the ledger") {
  const uint64_t seed = 99;
  TripleProvider pa(seed), pb(seed);
  BeaverTriple ta = pa.issue(2, 3, 2, PartyId::A);
  BeaverTriple tb = pb.issue(2, 3, 2, PartyId::B);
  const FxMatrix u = fx_add(ta.u, tb.u);
  const FxMatrix v = fx_add(ta.v, tb.v);
  const FxMatrix w = fx_add(ta.w, tb.w);
  CHECK(w == fx_matmul_raw(u, v));
  CHECK(pa.issued_count() == 1);

  SUBCASE("capacity exhaustion") {
    TripleProvider small(seed, 1);
    small.issue(1, 1, 1, PartyId::A);
    CHECK_THROWS_AS(small.issue(1, 1, 1, PartyId::A), ResourceError);
  }
}

TEST_CASE("shared_matmul multiplies") {
  FxConfig cfg;
  const uint64_t seed = 1234;

  SUBCASE("1x1 known product") {
    auto compute = [&](PartyId me, Link& link, double x, double y) {
      TripleProvider provider(seed);
      Rng rng(derive_seed(seed, me == PartyId::A ? "a" : "b"));
      // Party A holds x fully, party B holds y fully (degenerate sharing).
      FxMatrix mx(1, 1), my(1, 1);
      if (me == PartyId::A) mx.at(0, 0) = fx_encode(x, cfg);
      if (me == PartyId::B) my.at(0, 0) = fx_encode(y, cfg);
      ShareMatrix sx{me, mx, 0}, sy{me, my, 0};
      BeaverTriple t = provider.issue(1, 1, 1, me);
      return shared_matmul(me, sx, sy, t, link, cfg);
    };
    auto [ra, rb] = run_pair(
        [&](Link& l) { return compute(PartyId::A, l, 2.0, 0.0); },
        [&](Link& l) { return compute(PartyId::B, l, 0.0, 3.0); });
    const double got = fx_decode(reconstruct(ra, rb).at(0, 0), cfg);
    CHECK(std::fabs(got - 6.0) <= 0x1.0p-15);
  }

  SUBCASE("zero annihilates") {
    auto compute = [&](PartyId me, Link& link) {
      TripleProvider provider(seed);
      Rng rng(derive_seed(seed, me == PartyId::A ? "a" : "b"));
      FxMatrix zero(2, 2);
      Tensor yv(2, 2);
      yv.at(0, 0) = 1.5;
      yv.at(1, 1) = -2.5;
      FxMatrix y = me == PartyId::B ? fx_encode_matrix(yv, cfg) : FxMatrix(2, 2);
      ShareMatrix sx{me, zero, 0}, sy{me, y, 0};
      BeaverTriple t = provider.issue(2, 2, 2, me);
      return shared_matmul(me, sx, sy, t, link, cfg);
    };
    auto [ra, rb] = run_pair([&](Link& l) { return compute(PartyId::A, l); },
                             [&](Link& l) { return compute(PartyId::B, l); });
    const Tensor got = fx_decode_matrix(reconstruct(ra, rb), cfg);
    for (size_t i = 0; i < got.size(); ++i) {
      CHECK(std::fabs(got.data()[i]) <= 0x1.0p-15);
    }
  }

  SUBCASE("random 8x4 * 4x3 over 50 trials") {
    Rng data_rng(555);
    for (int trial = 0; trial < 50; ++trial) {
      const Tensor xa = testutil::random_tensor(8, 4, data_rng, -2.0, 2.0);
      const Tensor xb = testutil::random_tensor(8, 4, data_rng, -2.0, 2.0);
      const Tensor ya = testutil::random_tensor(4, 3, data_rng, -2.0, 2.0);
      const Tensor yb = testutil::random_tensor(4, 3, data_rng, -2.0, 2.0);
      const uint64_t tseed = derive_seed(seed, "trial", trial);
      auto compute = [&](PartyId me, Link& link) {
        TripleProvider provider(tseed);
        const Tensor& xv = me == PartyId::A ? xa : xb;
        const Tensor& yv = me == PartyId::A ? ya : yb;
        ShareMatrix sx{me, fx_encode_matrix(xv, cfg), 0};
        ShareMatrix sy{me, fx_encode_matrix(yv, cfg), 0};
        BeaverTriple t = provider.issue(8, 4, 3, me);
        return shared_matmul(me, sx, sy, t, link, cfg);
      };
      auto [ra, rb] = run_pair([&](Link& l) { return compute(PartyId::A, l); },
                               [&](Link& l) { return compute(PartyId::B, l); });
      const Tensor got = fx_decode_matrix(reconstruct(ra, rb), cfg);
      const Tensor want = testutil::naive_matmul(add(xa, xb), add(ya, yb));
      CHECK(max_abs_diff(got, want) <= 8.0 * 0x1.0p-15);
    }
  }
}

TEST_CASE("shared_matmul respects alternate fixed-point precisions") {
  // The ring parameters are tunable; the error bound scales with the chosen
  // resolution.
  Rng data_rng(999);
  for (int frac_bits : {12, 20, 24}) {
    FxConfig cfg;
    cfg.frac_bits = frac_bits;
    cfg.mag_bound = 1024.0;
    cfg.validate();
    const Tensor xa = testutil::random_tensor(4, 3, data_rng);
    const Tensor xb = testutil::random_tensor(4, 3, data_rng);
    const Tensor ya = testutil::random_tensor(3, 2, data_rng);
    const Tensor yb = testutil::random_tensor(3, 2, data_rng);
    const uint64_t seed = derive_seed(7100, "fb", frac_bits);
    auto compute = [&](PartyId me, Link& link) {
      TripleProvider provider(seed);
      ShareMatrix sx{me, fx_encode_matrix(me == PartyId::A ? xa : xb, cfg), 0};
      ShareMatrix sy{me, fx_encode_matrix(me == PartyId::A ? ya : yb, cfg), 0};
      BeaverTriple t = provider.issue(4, 3, 2, me);
      return shared_matmul(me, sx, sy, t, link, cfg);
    };
    auto [ra, rb] = run_pair([&](Link& l) { return compute(PartyId::A, l); },
                             [&](Link& l) { return compute(PartyId::B, l); });
    const Tensor got = fx_decode_matrix(reconstruct(ra, rb), cfg);
    const Tensor want = testutil::naive_matmul(add(xa, xb), add(ya, yb));
    CHECK(max_abs_diff(got, want) <=
          (2.0 * 3.0 + 1.0) * cfg.resolution());  // |entries| <= 2, k = 3
  }
}

TEST_CASE("consumed triples cannot be reused") {
  FxConfig cfg;
  // Assertions stay on the main thread; the async side reports a bool.
  auto compute = [&](PartyId me, Link& link) {
    TripleProvider provider(31);
    FxMatrix m(1, 1);
    ShareMatrix s{me, m, 0};
    BeaverTriple t = provider.issue(1, 1, 1, me);
    shared_matmul(me, s, s, t, link, cfg);
    try {
      shared_matmul(me, s, s, t, link, cfg);
      return false;
    } catch (const ResourceError&) {
      return true;
    }
  };
  auto [a_threw, b_threw] =
      run_pair([&](Link& l) { return compute(PartyId::A, l); },
               [&](Link& l) { return compute(PartyId::B, l); });
  CHECK(a_threw);
  CHECK(b_threw);
}

TEST_CASE("secure_first_layer equals the plaintext block product") {
  FxConfig cfg;
  Rng data_rng(777);

  SUBCASE("zero parameters give zero pre-activations") {
    const Tensor xa = testutil::random_tensor(4, 3, data_rng);
    const Tensor xb = testutil::random_tensor(4, 2, data_rng);
    auto fa = [&](Link& l) {
      TripleProvider p(1);
      Rng r(derive_seed(1, "sa"));
      return secure_first_layer(PartyId::A, fx_encode_matrix(xa, cfg), FxMatrix(3, 2),
                                p, l, cfg, r);
    };
    auto fb = [&](Link& l) {
      TripleProvider p(1);
      Rng r(derive_seed(1, "sb"));
      return secure_first_layer(PartyId::B, fx_encode_matrix(xb, cfg), FxMatrix(2, 2),
                                p, l, cfg, r);
    };
    auto [ra, rb] = run_pair(fa, fb);
    const Tensor got = fx_decode_matrix(reconstruct(ra, rb), cfg);
    for (size_t i = 0; i < got.size(); ++i) CHECK(std::fabs(got.data()[i]) <= 0x1.0p-15);
  }

  SUBCASE("random instances match X_A*th_A + X_B*th_B") {
    for (int trial = 0; trial < 20; ++trial) {
      const Tensor xa = testutil::random_tensor(4, 3, data_rng);
      const Tensor xb = testutil::random_tensor(4, 3, data_rng);
      const Tensor ta = testutil::random_tensor(3, 2, data_rng);
      const Tensor tb = testutil::random_tensor(3, 2, data_rng);
      const uint64_t s = derive_seed(9000, "t", trial);
      auto fa = [&](Link& l) {
        TripleProvider p(s);
        Rng r(derive_seed(s, "sa"));
        return secure_first_layer(PartyId::A, fx_encode_matrix(xa, cfg),
                                  fx_encode_matrix(ta, cfg), p, l, cfg, r);
      };
      auto fb = [&](Link& l) {
        TripleProvider p(s);
        Rng r(derive_seed(s, "sb"));
        return secure_first_layer(PartyId::B, fx_encode_matrix(xb, cfg),
                                  fx_encode_matrix(tb, cfg), p, l, cfg, r);
      };
      auto [ra, rb] = run_pair(fa, fb);
      const Tensor got = fx_decode_matrix(reconstruct(ra, rb), cfg);
      const Tensor want =
          add(testutil::naive_matmul(xa, ta), testutil::naive_matmul(xb, tb));
      CHECK(max_abs_diff(got, want) <= 6.0 * 0x1.0p-15);
    }
  }

  SUBCASE("batch size mismatch is rejected") {
    auto fa = [&](Link& l) {
      TripleProvider p(3);
      Rng r(derive_seed(3, "sa"));
      FxMatrix x(4, 2), th(2, 2);
      return secure_first_layer(PartyId::A, x, th, p, l, cfg, r);
    };
    auto fb = [&](Link& l) {
      TripleProvider p(3);
      Rng r(derive_seed(3, "sb"));
      FxMatrix x(5, 2), th(2, 2);  // five rows against four
      return secure_first_layer(PartyId::B, x, th, p, l, cfg, r);
    };
    auto [ca, cb] = make_loopback_pair();
    Link la(ca, SessionId{}), lb(cb, SessionId{});
    auto fut = std::async(std::launch::async, [&] {
      try {
        fb(lb);
        return false;
      } catch (const Error&) {
        lb.close();
        return true;
      }
    });
    bool a_threw = false;
    try {
      fa(la);
    } catch (const Error&) {
      a_threw = true;
      la.close();
    }
    CHECK(fut.get());
    CHECK(a_threw);
  }
}

TEST_CASE("secure_first_layer round count is constant in the batch size") {
  FxConfig cfg;
  auto count_frames = [&](size_t batch) {
    auto [ca, cb] = make_loopback_pair();
    Link la(ca, SessionId{}), lb(cb, SessionId{});
    Rng data_rng(batch);
    const Tensor xa = testutil::random_tensor(batch, 3, data_rng);
    const Tensor xb = testutil::random_tensor(batch, 3, data_rng);
    const Tensor ta = testutil::random_tensor(3, 2, data_rng);
    const Tensor tb = testutil::random_tensor(3, 2, data_rng);
    auto fut = std::async(std::launch::async, [&] {
      TripleProvider p(1);
      Rng r(derive_seed(1, "sb"));
      return secure_first_layer(PartyId::B, fx_encode_matrix(xb, cfg),
                                fx_encode_matrix(tb, cfg), p, lb, cfg, r);
    });
    TripleProvider p(1);
    Rng r(derive_seed(1, "sa"));
    secure_first_layer(PartyId::A, fx_encode_matrix(xa, cfg), fx_encode_matrix(ta, cfg),
                       p, la, cfg, r);
    fut.get();
    return ca->stats().frames_sent + ca->stats().frames_recv;
  };
  const auto frames_small = count_frames(2);
  const auto frames_large = count_frames(64);
  CHECK(frames_small == frames_large);
  CHECK(frames_small == 12);
}

TEST_CASE("transcript is independent of the inputs under mask resampling") {
  // Inputs stay fixed; across mask reseedings every transmitted matrix entry
  // must sweep the ring uniformly (a plaintext would sit in a single bin).
  // Low-order bits are binned because they are uniform for every masked
  // frame regardless of truncation structure.
  FxConfig cfg;
  constexpr int kRuns = 160;
  constexpr size_t kBins = 8;

  auto transcript_counts = [&](double scale_inputs, const char* tag) {
    std::vector<std::vector<uint64_t>> per_frame;
    for (int run = 0; run < kRuns; ++run) {
      auto sink = std::make_shared<TranscriptSink>();
      auto [ca, cb] = make_loopback_pair();
      auto ta_ch = with_transcript(ca, sink);
      Link la(ta_ch, SessionId{});
      Link lb(cb, SessionId{});
      Rng data_rng(101);  // inputs fixed across runs
      const Tensor xa = scale(testutil::random_tensor(3, 2, data_rng), scale_inputs);
      const Tensor xb = scale(testutil::random_tensor(3, 2, data_rng), scale_inputs);
      const Tensor tha = scale(testutil::random_tensor(2, 2, data_rng), scale_inputs);
      const Tensor thb = scale(testutil::random_tensor(2, 2, data_rng), scale_inputs);
      const uint64_t mask_seed = derive_seed(4242, tag, run);
      auto fut = std::async(std::launch::async, [&] {
        TripleProvider p(mask_seed);
        Rng r(derive_seed(mask_seed, "sb"));
        return secure_first_layer(PartyId::B, fx_encode_matrix(xb, cfg),
                                  fx_encode_matrix(thb, cfg), p, lb, cfg, r);
      });
      TripleProvider p(mask_seed);
      Rng r(derive_seed(mask_seed, "sa"));
      secure_first_layer(PartyId::A, fx_encode_matrix(xa, cfg),
                         fx_encode_matrix(tha, cfg), p, la, cfg, r);
      fut.get();

      const auto entries = sink->snapshot();
      if (per_frame.empty()) {
        per_frame.assign(entries.size(), std::vector<uint64_t>(kBins, 0));
      }
      REQUIRE(entries.size() == per_frame.size());
      for (size_t f = 0; f < entries.size(); ++f) {
        const FxMatrix m = decode_ring_matrix(entries[f].message.payload);
        per_frame[f][(m.data()[0] >> 8) & 0x7] += 1;
      }
    }
    return per_frame;
  };

  // df = 7: mean 7, sd ~3.7; the seeded statistic is deterministic, and a
  // plaintext frame would score (160-20)^2/20 + 7*20 = 1120.
  for (const auto& counts : transcript_counts(0.1, "mask-small")) {
    CHECK(testutil::chi_square_uniform(counts) < 33.0);
  }
  for (const auto& counts : transcript_counts(8.0, "mask-large")) {
    CHECK(testutil::chi_square_uniform(counts) < 33.0);
  }
}

TEST_SUITE_END();
