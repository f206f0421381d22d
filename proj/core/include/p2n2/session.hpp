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

#include <chrono>
#include <map>
#include <optional>

#include "p2n2/channel.hpp"
#include "p2n2/roles.hpp"
#include "p2n2/tcp.hpp"

namespace p2n2 {

// One role's addressing record: where it listens and where its peers are.
struct Endpoint {
  RoleId role = RoleId::HolderA;
  HostPort listen;
  std::map<RoleId, HostPort> peers;
};

// A sequenced view over one channel within one session. Enforces the wire
// discipline: session-id match, strictly increasing seq per sender with no
// gaps, expected message kinds. Surfaces peer Abort frames as errors.
class Link {
 public:
  Link() = default;
  Link(ChannelPtr channel, SessionId session,
       std::chrono::milliseconds timeout = std::chrono::milliseconds(120000));

  bool valid() const { return channel_ != nullptr; }
  Channel& channel() { return *channel_; }
  ChannelPtr channel_ptr() { return channel_; }
  const SessionId& session() const { return session_; }
  void set_timeout(std::chrono::milliseconds t) { timeout_ = t; }

  void send(MsgKind kind, std::vector<uint8_t> payload);
  // Receives the next frame, which must be of `kind` (Abort is always
  // admissible and raises a ProtocolError carrying the peer's reason).
  Message recv_expect(MsgKind kind);

  void send_ring(MsgKind kind, const FxMatrix& m) { send(kind, encode_ring_matrix(m)); }
  FxMatrix recv_ring(MsgKind kind) { return decode_ring_matrix(recv_expect(kind).payload); }
  void send_real(MsgKind kind, const Tensor& t) { send(kind, encode_real_matrix(t)); }
  Tensor recv_real(MsgKind kind) { return decode_real_matrix(recv_expect(kind).payload); }

  // Best-effort abort notification; never throws.
  void send_abort(const std::string& reason) noexcept;

  void close() {
    if (channel_) channel_->close();
  }

 private:
  ChannelPtr channel_;
  SessionId session_{};
  std::chrono::milliseconds timeout_{120000};
  uint64_t next_send_seq_ = 0;
  uint64_t next_recv_seq_ = 0;
};

SessionId make_session_id(uint64_t seed);

// Config digest carried in the handshake; 16 bytes from a canonical string.
SessionId digest_from_text(const std::string& canonical);

struct HandshakeOptions {
  std::chrono::milliseconds timeout{30000};
};

// Two-sided Hello/Config exchange over an established link. The initiator
// speaks first. Both sides verify the peer presents an identical config
// digest; mismatch aborts the session. Returns the peer's announced role.
RoleId handshake_initiate(Link& link, RoleId self, const SessionId& config_digest,
                          const HandshakeOptions& opts = {});
RoleId handshake_respond(Link& link, RoleId self, const SessionId& config_digest,
                         const HandshakeOptions& opts = {});

// The channels one role holds toward its two peers. The entry for the role
// itself stays empty.
struct RoleChannels {
  ChannelPtr to_a;
  ChannelPtr to_b;
  ChannelPtr to_s;

  ChannelPtr& toward(RoleId r) {
    switch (r) {
      case RoleId::HolderA: return to_a;
      case RoleId::HolderB: return to_b;
      case RoleId::Server: return to_s;
    }
    raise<ConfigError>("bad role");
  }
};

// Builds the full in-process mesh: [0] holder A, [1] holder B, [2] server.
std::array<RoleChannels, 3> make_local_mesh();

// Establishes this role's TCP connections per the fixed dialing rule:
// A dials B and S; B accepts A and dials S; S accepts both.
RoleChannels connect_role(const Endpoint& ep, std::chrono::milliseconds timeout);

}  // namespace p2n2
