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
#include "p2n2/split.hpp"
#include "p2n2/tcp.hpp"

using namespace p2n2;
using namespace std::chrono_literals;

TEST_SUITE_BEGIN("robustness");

namespace {

SplitData tiny_data(uint64_t seed) {
  Rng rng(seed);
  SplitData d;
  d.x_a_train = testutil::random_tensor(16, 3, rng);
  d.x_b_train = testutil::random_tensor(16, 3, rng);
  d.x_a_test = testutil::random_tensor(8, 3, rng);
  d.x_b_test = testutil::random_tensor(8, 3, rng);
  for (int i = 0; i < 16; ++i) d.y_train.push_back(i % 2);
  for (int i = 0; i < 8; ++i) d.y_test.push_back(i % 2);
  return d;
}

SessionConfig tiny_config(const SplitData& d, uint64_t seed) {
  SessionConfig cfg;
  cfg.hidden_dims = {4};
  cfg.hidden_acts = {Activation::Sigmoid};
  cfg.batch_size = 8;
  cfg.epochs = 2;
  cfg.seed = seed;
  cfg.step_timeout = std::chrono::milliseconds(1500);
  cfg.handshake_timeout = std::chrono::milliseconds(1500);
  d.fill_config_dims(cfg);
  return cfg;
}

}  // namespace

TEST_CASE("killing any role surfaces errors at the peers within the timeout") {
  const SplitData d = tiny_data(1);
  int trial = 0;
  // The server moves the fewest frames in this session (roughly fifty);
  // every budget must land inside every role's run.
  for (RoleId victim : {RoleId::HolderA, RoleId::HolderB, RoleId::Server}) {
    for (uint64_t frames : {3ULL, 9ULL, 17ULL, 26ULL, 35ULL, 44ULL}) {
      CAPTURE(role_name(victim));
      CAPTURE(frames);
      SessionConfig cfg = tiny_config(d, 100 + trial);
      LocalSimOptions opts;
      opts.fault_role = victim;
      opts.fault_after_frames = frames;

      const auto t0 = std::chrono::steady_clock::now();
      auto fut = std::async(std::launch::async, [&] {
        try {
          train_split_local(cfg, d, opts);
          return false;  // the injected fault must surface
        } catch (const Error&) {
          return true;
        }
      });
      // Watchdog: the whole session must fail fast, never hang. Allow the
      // step timeout plus generous scheduling slack.
      REQUIRE(fut.wait_for(15s) == std::future_status::ready);
      CHECK(fut.get());
      CHECK(std::chrono::steady_clock::now() - t0 < 10s);
      ++trial;
    }
  }
  CHECK(trial == 18);
}

TEST_CASE("two extra fault points make twenty trials in total") {
  const SplitData d = tiny_data(2);
  for (uint64_t frames : {22ULL, 48ULL}) {
    SessionConfig cfg = tiny_config(d, 500 + frames);
    LocalSimOptions opts;
    opts.fault_role = RoleId::Server;
    opts.fault_after_frames = frames;
    auto fut = std::async(std::launch::async, [&] {
      try {
        train_split_local(cfg, d, opts);
        return false;
      } catch (const Error&) {
        return true;
      }
    });
    REQUIRE(fut.wait_for(15s) == std::future_status::ready);
    CHECK(fut.get());
  }
}

TEST_CASE("a full session runs over real TCP sockets") {
  const SplitData d = tiny_data(3);
  SessionConfig cfg = tiny_config(d, 42);
  cfg.step_timeout = std::chrono::milliseconds(10000);
  cfg.handshake_timeout = std::chrono::milliseconds(10000);

  TcpListener listener_b(HostPort{"127.0.0.1", 0});
  TcpListener listener_s(HostPort{"127.0.0.1", 0});
  const uint16_t port_b = listener_b.port();
  const uint16_t port_s = listener_s.port();

  auto server_job = std::async(std::launch::async, [&] {
    RoleChannels ch;
    ch.to_a = listener_s.accept(10000ms);
    ch.to_b = listener_s.accept(10000ms);
    RoleInput in;
    return run_role(RoleId::Server, cfg, in, std::move(ch));
  });
  auto holder_b_job = std::async(std::launch::async, [&] {
    RoleChannels ch;
    ch.to_a = listener_b.accept(10000ms);
    ch.to_s = tcp_connect(HostPort{"127.0.0.1", port_s}, 10000ms);
    RoleInput in;
    in.x_train = &d.x_b_train;
    in.x_test = &d.x_b_test;
    return run_role(RoleId::HolderB, cfg, in, std::move(ch));
  });
  auto holder_a_job = std::async(std::launch::async, [&] {
    RoleChannels ch;
    ch.to_b = tcp_connect(HostPort{"127.0.0.1", port_b}, 10000ms);
    ch.to_s = tcp_connect(HostPort{"127.0.0.1", port_s}, 10000ms);
    RoleInput in;
    in.x_train = &d.x_a_train;
    in.x_test = &d.x_a_test;
    in.y_train = &d.y_train;
    in.y_test = &d.y_test;
    in.record_wall_clock = false;
    return run_role(RoleId::HolderA, cfg, in, std::move(ch));
  });

  const RoleOutcome a = holder_a_job.get();
  holder_b_job.get();
  server_job.get();

  // Content equals the loopback run bit for bit; only transport differs.
  const auto local = train_split_local(cfg, d);
  CHECK(render_trace(a.trace) == render_trace(local.outcome.trace));
  CHECK(a.test_scores == local.outcome.test_scores);
}

TEST_CASE("mismatched configs abort in the handshake") {
  const SplitData d = tiny_data(4);
  SessionConfig cfg = tiny_config(d, 77);

  auto mesh = make_local_mesh();
  SessionConfig other = cfg;
  other.fx.frac_bits = 13;  // digest differs

  RoleInput in_a, in_b, in_s;
  in_a.x_train = &d.x_a_train;
  in_a.x_test = &d.x_a_test;
  in_a.y_train = &d.y_train;
  in_a.y_test = &d.y_test;
  in_b.x_train = &d.x_b_train;
  in_b.x_test = &d.x_b_test;

  auto job = [](RoleId role, const SessionConfig& c, const RoleInput& in,
                RoleChannels ch) {
    return std::async(std::launch::async, [role, &c, &in, ch]() mutable {
      try {
        run_role(role, c, in, std::move(ch));
        return false;
      } catch (const Error&) {
        return true;
      }
    });
  };
  auto ja = job(RoleId::HolderA, cfg, in_a, mesh[0]);
  auto jb = job(RoleId::HolderB, other, in_b, mesh[1]);
  auto js = job(RoleId::Server, cfg, in_s, mesh[2]);
  CHECK(ja.get());
  CHECK(jb.get());
  // The server may finish its handshakes before the A<->B mismatch fires,
  // but it must never hang.
  REQUIRE(js.wait_for(15s) == std::future_status::ready);
  js.get();
}

TEST_SUITE_END();
