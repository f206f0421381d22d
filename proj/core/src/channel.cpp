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

#include "p2n2/channel.hpp"

#include <thread>

#include "p2n2/errors.hpp"

namespace p2n2 {

namespace {

// One direction of a loopback pair.
struct LoopbackQueue {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<Message> items;
  bool closed = false;

  void push(const Message& m) {
    {
      std::lock_guard<std::mutex> lk(mu);
      if (closed) raise<ProtocolError>("loopback channel closed");
      items.push_back(m);
    }
    cv.notify_one();
  }

  Message pop(std::chrono::milliseconds timeout) {
    std::unique_lock<std::mutex> lk(mu);
    if (!cv.wait_for(lk, timeout, [&] { return !items.empty() || closed; })) {
      raise<TimeoutError>("loopback recv timed out after ", timeout.count(), " ms");
    }
    if (items.empty()) raise<ProtocolError>("loopback channel closed by peer");
    Message m = std::move(items.front());
    items.pop_front();
    return m;
  }

  void close() {
    {
      std::lock_guard<std::mutex> lk(mu);
      closed = true;
    }
    cv.notify_all();
  }
};

class LoopbackChannel final : public Channel {
 public:
  LoopbackChannel(std::shared_ptr<LoopbackQueue> out, std::shared_ptr<LoopbackQueue> in)
      : out_(std::move(out)), in_(std::move(in)) {}

  ~LoopbackChannel() override { close(); }

  void send(const Message& m) override {
    const size_t wire = kFrameHeaderSize + m.payload.size();
    out_->push(m);
    note_sent(m, wire);
  }

  Message recv(std::chrono::milliseconds timeout) override {
    Message m = in_->pop(timeout);
    note_recv(m, kFrameHeaderSize + m.payload.size());
    return m;
  }

  void close() override {
    out_->close();
    in_->close();
  }

 private:
  std::shared_ptr<LoopbackQueue> out_;
  std::shared_ptr<LoopbackQueue> in_;
};

class ThrottledChannel final : public Channel {
 public:
  ThrottledChannel(ChannelPtr inner, ThrottleSpec spec)
      : inner_(std::move(inner)), spec_(spec) {
    spec_.validate();
    // Start with a full bucket.
    tokens_ = static_cast<double>(spec_.burst_bytes);
    last_refill_ = Clock::now();
  }

  void send(const Message& m) override {
    if (spec_.rate_bps > 0) pace(kFrameHeaderSize + m.payload.size(), m.kind);
    inner_->send(m);
    note_sent(m, kFrameHeaderSize + m.payload.size());
  }

  Message recv(std::chrono::milliseconds timeout) override {
    Message m = inner_->recv(timeout);
    note_recv(m, kFrameHeaderSize + m.payload.size());
    return m;
  }

  void close() override { inner_->close(); }

 private:
  using Clock = std::chrono::steady_clock;

  // Consumes tokens for `bytes`, sleeping against an absolute deadline so
  // scheduling overshoot does not accumulate across chunks.
  void pace(size_t bytes, MsgKind kind) {
    const double bytes_per_sec = static_cast<double>(spec_.rate_bps) / 8.0;
    const auto start = Clock::now();
    refill(start);
    double need = static_cast<double>(bytes);
    if (need <= tokens_) {
      tokens_ -= need;
      return;
    }
    need -= tokens_;
    tokens_ = 0.0;
    const double wait_sec = need / bytes_per_sec;
    const auto deadline =
        start + std::chrono::duration_cast<Clock::duration>(
                    std::chrono::duration<double>(wait_sec));
    std::this_thread::sleep_until(deadline);
    last_refill_ = Clock::now();
    const auto stalled = std::chrono::duration_cast<std::chrono::microseconds>(
        Clock::now() - start);
    stats_.stall_micros += static_cast<uint64_t>(stalled.count());
    (void)kind;
  }

  void refill(Clock::time_point now) {
    const double bytes_per_sec = static_cast<double>(spec_.rate_bps) / 8.0;
    const double dt = std::chrono::duration<double>(now - last_refill_).count();
    tokens_ += dt * bytes_per_sec;
    if (tokens_ > static_cast<double>(spec_.burst_bytes)) {
      tokens_ = static_cast<double>(spec_.burst_bytes);
    }
    last_refill_ = now;
  }

  ChannelPtr inner_;
  ThrottleSpec spec_;
  double tokens_ = 0.0;
  Clock::time_point last_refill_;
};

class TranscriptChannel final : public Channel {
 public:
  TranscriptChannel(ChannelPtr inner, std::shared_ptr<TranscriptSink> sink)
      : inner_(std::move(inner)), sink_(std::move(sink)) {}

  void send(const Message& m) override {
    sink_->record(true, m);
    inner_->send(m);
    note_sent(m, kFrameHeaderSize + m.payload.size());
  }

  Message recv(std::chrono::milliseconds timeout) override {
    Message m = inner_->recv(timeout);
    sink_->record(false, m);
    note_recv(m, kFrameHeaderSize + m.payload.size());
    return m;
  }

  void close() override { inner_->close(); }

 private:
  ChannelPtr inner_;
  std::shared_ptr<TranscriptSink> sink_;
};

}  // namespace

std::pair<ChannelPtr, ChannelPtr> make_loopback_pair() {
  auto q_ab = std::make_shared<LoopbackQueue>();
  auto q_ba = std::make_shared<LoopbackQueue>();
  return {std::make_shared<LoopbackChannel>(q_ab, q_ba),
          std::make_shared<LoopbackChannel>(q_ba, q_ab)};
}

ChannelPtr throttle(ChannelPtr inner, const ThrottleSpec& spec) {
  if (spec.rate_bps == 0) return inner;
  return std::make_shared<ThrottledChannel>(std::move(inner), spec);
}

ChannelPtr with_transcript(ChannelPtr inner, std::shared_ptr<TranscriptSink> sink) {
  return std::make_shared<TranscriptChannel>(std::move(inner), std::move(sink));
}

}  // namespace p2n2
