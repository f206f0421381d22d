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

#include "p2n2/fixed.hpp"
#include "p2n2/rng.hpp"

namespace {

using namespace p2n2;

FxMatrix random_ring(size_t r, size_t c, uint64_t seed) {
  Rng rng(seed);
  FxMatrix m(r, c);
  for (size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.next_u64();
  return m;
}

void BM_FxEncode(benchmark::State& state) {
  FxConfig cfg;
  Rng rng(1);
  std::vector<double> xs(4096);
  for (auto& x : xs) x = rng.uniform(-100.0, 100.0);
  for (auto _ : state) {
    RingElem acc = 0;
    for (double x : xs) acc += fx_encode(x, cfg);
    benchmark::DoNotOptimize(acc);
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) * 4096);
}
BENCHMARK(BM_FxEncode);

void BM_RingMatmul(benchmark::State& state) {
  const size_t n = static_cast<size_t>(state.range(0));
  const FxMatrix a = random_ring(n, n, 2);
  const FxMatrix b = random_ring(n, n, 3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fx_matmul_raw(a, b));
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) *
                          static_cast<int64_t>(n * n * n));
}
BENCHMARK(BM_RingMatmul)->Arg(64)->Arg(128)->Arg(256)->Arg(512);

void BM_RingMatmulRect(benchmark::State& state) {
  // The distress-shaped first layer: batch x 556 times 556 x 400.
  const FxMatrix a = random_ring(256, 556, 4);
  const FxMatrix b = random_ring(556, 400, 5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fx_matmul_raw(a, b));
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) * 256 * 556 * 400);
}
BENCHMARK(BM_RingMatmulRect);

}  // namespace
