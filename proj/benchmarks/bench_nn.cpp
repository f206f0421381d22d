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

#include "p2n2/nn.hpp"

namespace {

using namespace p2n2;

Tensor random_tensor(size_t r, size_t c, Rng& rng) {
  Tensor t(r, c);
  for (auto& v : t.raw()) v = rng.uniform(-1.0, 1.0);
  return t;
}

void BM_DenseForwardBackward(benchmark::State& state) {
  const size_t batch = static_cast<size_t>(state.range(0));
  Rng rng(3);
  DenseParams p = init_dense(512, 128, rng);
  const Tensor x = random_tensor(batch, 512, rng);
  for (auto _ : state) {
    DenseCache cache;
    Tensor out = dense_forward(x, p, Activation::Relu, &cache);
    benchmark::DoNotOptimize(dense_backward(out, cache, p, Activation::Relu));
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) *
                          static_cast<int64_t>(batch * 512 * 128));
}
BENCHMARK(BM_DenseForwardBackward)->Arg(32)->Arg(128);

void BM_AdamStep(benchmark::State& state) {
  Rng rng(4);
  Tensor p = random_tensor(512, 128, rng);
  const Tensor g = random_tensor(512, 128, rng);
  OptimizerState st;
  st.config.kind = OptimizerKind::Adam;
  st.config.learning_rate = 0.001;
  for (auto _ : state) {
    optimizer_step({&p}, {&g}, st);
    benchmark::DoNotOptimize(p.data());
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) * 512 * 128);
}
BENCHMARK(BM_AdamStep);

}  // namespace
