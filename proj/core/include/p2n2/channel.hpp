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

#include <array>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <memory>
#include <mutex>
#include <string>

#include "p2n2/message.hpp"

namespace p2n2 {

// Per-kind byte and stall accounting; one Stats per channel endpoint.
struct ChannelStats {
  std::array<std::atomic<uint64_t>, 8> bytes_sent_by_kind{};
  std::array<std::atomic<uint64_t>, 8> bytes_recv_by_kind{};
  std::atomic<uint64_t> frames_sent{0};
  std::atomic<uint64_t> frames_recv{0};
  std::atomic<uint64_t> stall_micros{0};

  uint64_t bytes_sent() const {
    uint64_t t = 0;
    for (const auto& b : bytes_sent_by_kind) t += b.load();
    return t;
  }
  uint64_t bytes_recv() const {
    uint64_t t = 0;
    for (const auto& b : bytes_recv_by_kind) t += b.load();
    return t;
  }
};

// Reliable, ordered, framed duplex channel endpoint. One thread uses an
// endpoint at a time; the peer endpoint lives on another thread (loopback)
// or another process (tcp). send/recv block. close() releases any blocked
// peer with a closed-channel error.
class Channel {
 public:
  virtual ~Channel() = default;

  virtual void send(const Message& m) = 0;
  // Blocks up to timeout; throws TimeoutError on expiry and ProtocolError if
  // the peer closed.
  virtual Message recv(std::chrono::milliseconds timeout) = 0;
  virtual void close() = 0;

  ChannelStats& stats() { return stats_; }
  const ChannelStats& stats() const { return stats_; }

 protected:
  void note_sent(const Message& m, size_t wire_bytes) {
    stats_.bytes_sent_by_kind[static_cast<size_t>(m.kind)] += wire_bytes;
    stats_.frames_sent += 1;
  }
  void note_recv(const Message& m, size_t wire_bytes) {
    stats_.bytes_recv_by_kind[static_cast<size_t>(m.kind)] += wire_bytes;
    stats_.frames_recv += 1;
  }

  ChannelStats stats_;
};

using ChannelPtr = std::shared_ptr<Channel>;

// In-process loopback: a pair of endpoints over two blocking queues.
// Deterministic content; used for --local-sim and tests.
std::pair<ChannelPtr, ChannelPtr> make_loopback_pair();

// Token-bucket outbound throttle. rate_bps is in bits per second; burst is
// the bucket capacity in bytes. Wraps an inner channel; timing only, content
// passes through untouched.
struct ThrottleSpec {
  uint64_t rate_bps = 0;  // 0 = unlimited
  uint64_t burst_bytes = 64 * 1024;

  void validate() const {
    P2N2_REQUIRE(burst_bytes > 0, ConfigError, "throttle burst must be positive");
  }
};

ChannelPtr throttle(ChannelPtr inner, const ThrottleSpec& spec);

// Records every frame that crosses an endpoint; test hook for transcript
// scanning. Direction: true = sent by this endpoint.
struct TranscriptEntry {
  bool sent;
  Message message;
};

class TranscriptSink {
 public:
  void record(bool sent, const Message& m) {
    std::lock_guard<std::mutex> lk(mu_);
    entries_.push_back({sent, m});
  }
  std::vector<TranscriptEntry> snapshot() const {
    std::lock_guard<std::mutex> lk(mu_);
    return entries_;
  }

 private:
  mutable std::mutex mu_;
  std::vector<TranscriptEntry> entries_;
};

ChannelPtr with_transcript(ChannelPtr inner, std::shared_ptr<TranscriptSink> sink);

}  // namespace p2n2
