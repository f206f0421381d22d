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

#include "p2n2/channel.hpp"
#include "p2n2/rng.hpp"

namespace {

using namespace p2n2;
using namespace std::chrono_literals;

void BM_LoopbackRoundTrip(benchmark::State& state) {
  const size_t elems = static_cast<size_t>(state.range(0));
  Rng rng(5);
  FxMatrix m(elems, 1);
  for (size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.next_u64();
  auto [a, b] = make_loopback_pair();
  Message msg;
  msg.kind = MsgKind::ShareBlock;
  msg.payload = encode_ring_matrix(m);
  for (auto _ : state) {
    msg.seq++;
    a->send(msg);
    benchmark::DoNotOptimize(b->recv(5000ms));
  }
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations()) *
                          static_cast<int64_t>(msg.payload.size()));
}
BENCHMARK(BM_LoopbackRoundTrip)->Arg(1024)->Arg(65536);

void BM_FrameEncode(benchmark::State& state) {
  Rng rng(6);
  Message m;
  m.kind = MsgKind::Gradient;
  m.payload.resize(64 * 1024);
  for (auto& b : m.payload) b = static_cast<uint8_t>(rng.next_u64());
  for (auto _ : state) {
    benchmark::DoNotOptimize(encode_frame(m));
  }
  state.SetBytesProcessed(static_cast<int64_t>(state.iterations()) *
                          static_cast<int64_t>(m.payload.size()));
}
BENCHMARK(BM_FrameEncode);

}  // namespace
