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

#include <benchmark/benchmark.h>

#include <future>

#include "p2n2/share.hpp"

namespace {

using namespace p2n2;

void BM_ShareSplit(benchmark::State& state) {
  const size_t n = static_cast<size_t>(state.range(0));
  Rng rng(7);
  const FxMatrix m = random_ring_matrix(n, n, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(share(m, rng));
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) *
                          static_cast<int64_t>(n * n));
}
BENCHMARK(BM_ShareSplit)->Arg(64)->Arg(256);

void BM_SecureFirstLayer(benchmark::State& state) {
  // Both parties in one process over loopback; fraud-shaped blocks.
  const size_t batch = static_cast<size_t>(state.range(0));
  FxConfig fx;
  Rng rng(11);
  const FxMatrix xa = random_ring_matrix(batch, 14, rng);
  const FxMatrix xb = random_ring_matrix(batch, 14, rng);
  const FxMatrix ta = random_ring_matrix(14, 8, rng);
  const FxMatrix tb = random_ring_matrix(14, 8, rng);
  uint64_t round = 0;
  for (auto _ : state) {
    auto [ca, cb] = make_loopback_pair();
    Link la(ca, SessionId{});
    Link lb(cb, SessionId{});
    const uint64_t seed = 100 + round++;
    auto fut = std::async(std::launch::async, [&] {
      TripleProvider p(seed);
      Rng r(derive_seed(seed, "b"));
      return secure_first_layer(PartyId::B, xb, tb, p, lb, fx, r);
    });
    TripleProvider p(seed);
    Rng r(derive_seed(seed, "a"));
    benchmark::DoNotOptimize(secure_first_layer(PartyId::A, xa, ta, p, la, fx, r));
    fut.get();
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) *
                          static_cast<int64_t>(batch));
}
BENCHMARK(BM_SecureFirstLayer)->Arg(256)->Arg(1024)->Arg(5000)->Unit(benchmark::kMillisecond);

}  // namespace
