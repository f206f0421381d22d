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

#include "p2n2/session.hpp"

#include <cstring>

#include "p2n2/rng.hpp"

namespace p2n2 {

Link::Link(ChannelPtr channel, SessionId session, std::chrono::milliseconds timeout)
    : channel_(std::move(channel)), session_(session), timeout_(timeout) {}

void Link::send(MsgKind kind, std::vector<uint8_t> payload) {
  P2N2_REQUIRE(channel_ != nullptr, ProtocolError, "send on unconnected link");
  Message m;
  m.session_id = session_;
  m.seq = next_send_seq_++;
  m.kind = kind;
  m.payload = std::move(payload);
  channel_->send(m);
}

Message Link::recv_expect(MsgKind kind) {
  P2N2_REQUIRE(channel_ != nullptr, ProtocolError, "recv on unconnected link");
  Message m = channel_->recv(timeout_);
  P2N2_REQUIRE(m.session_id == session_, ProtocolError,
               "frame from a different session");
  P2N2_REQUIRE(m.seq == next_recv_seq_, ProtocolError, "seq gap: expected ",
               next_recv_seq_, ", got ", m.seq);
  ++next_recv_seq_;
  if (m.kind == MsgKind::Abort) {
    const std::string reason(m.payload.begin(), m.payload.end());
    raise<ProtocolError>("peer aborted: ", reason);
  }
  P2N2_REQUIRE(m.kind == kind, ProtocolError, "unexpected kind ",
               msg_kind_name(m.kind), ", expected ", msg_kind_name(kind));
  return m;
}

void Link::send_abort(const std::string& reason) noexcept {
  try {
    std::vector<uint8_t> payload(reason.begin(), reason.end());
    send(MsgKind::Abort, std::move(payload));
  } catch (...) {
    // The channel may already be gone; abort delivery is best effort.
  }
}

SessionId make_session_id(uint64_t seed) {
  SessionId id{};
  uint64_t s = seed ^ 0xa5c152f7d1b2e3c4ULL;
  const uint64_t lo = splitmix64(s);
  const uint64_t hi = splitmix64(s);
  std::memcpy(id.data(), &lo, 8);
  std::memcpy(id.data() + 8, &hi, 8);
  return id;
}

SessionId digest_from_text(const std::string& canonical) {
  SessionId id{};
  const uint64_t h1 = fnv1a64(canonical);
  const uint64_t h2 = fnv1a64(canonical, 0x84222325cbf29ce4ULL);
  std::memcpy(id.data(), &h1, 8);
  std::memcpy(id.data() + 8, &h2, 8);
  return id;
}

namespace {

std::vector<uint8_t> hello_payload(RoleId self) {
  return {static_cast<uint8_t>(self)};
}

RoleId parse_hello(const Message& m) {
  P2N2_REQUIRE(m.payload.size() == 1, ProtocolError, "bad Hello payload");
  P2N2_REQUIRE(m.payload[0] <= 2, ProtocolError, "bad role in Hello");
  return static_cast<RoleId>(m.payload[0]);
}

std::vector<uint8_t> digest_payload(const SessionId& digest) {
  return std::vector<uint8_t>(digest.begin(), digest.end());
}

void verify_digest(const Message& m, const SessionId& mine) {
  P2N2_REQUIRE(m.payload.size() == mine.size(), ProtocolError, "bad Config payload");
  const bool match = std::memcmp(m.payload.data(), mine.data(), mine.size()) == 0;
  P2N2_REQUIRE(match, ProtocolError,
               "config digest mismatch: the parties are not running the same "
               "session configuration");
}

}  // namespace

RoleId handshake_initiate(Link& link, RoleId self, const SessionId& config_digest,
                          const HandshakeOptions& opts) {
  link.set_timeout(opts.timeout);
  link.send(MsgKind::Hello, hello_payload(self));
  link.send(MsgKind::Config, digest_payload(config_digest));
  const RoleId peer = parse_hello(link.recv_expect(MsgKind::Hello));
  verify_digest(link.recv_expect(MsgKind::Config), config_digest);
  return peer;
}

RoleId handshake_respond(Link& link, RoleId self, const SessionId& config_digest,
                         const HandshakeOptions& opts) {
  link.set_timeout(opts.timeout);
  const RoleId peer = parse_hello(link.recv_expect(MsgKind::Hello));
  Message cfg = link.recv_expect(MsgKind::Config);
  link.send(MsgKind::Hello, hello_payload(self));
  link.send(MsgKind::Config, digest_payload(config_digest));
  verify_digest(cfg, config_digest);
  return peer;
}

std::array<RoleChannels, 3> make_local_mesh() {
  auto [ab, ba] = make_loopback_pair();
  auto [as, sa] = make_loopback_pair();
  auto [bs, sb] = make_loopback_pair();
  std::array<RoleChannels, 3> mesh;
  mesh[0].to_b = ab;
  mesh[0].to_s = as;
  mesh[1].to_a = ba;
  mesh[1].to_s = bs;
  mesh[2].to_a = sa;
  mesh[2].to_b = sb;
  return mesh;
}

RoleChannels connect_role(const Endpoint& ep, std::chrono::milliseconds timeout) {
  RoleChannels out;
  switch (ep.role) {
    case RoleId::HolderA: {
      out.to_b = tcp_connect(ep.peers.at(RoleId::HolderB), timeout);
      out.to_s = tcp_connect(ep.peers.at(RoleId::Server), timeout);
      break;
    }
    case RoleId::HolderB: {
      TcpListener listener(ep.listen);
      out.to_a = listener.accept(timeout);
      out.to_s = tcp_connect(ep.peers.at(RoleId::Server), timeout);
      break;
    }
    case RoleId::Server: {
      TcpListener listener(ep.listen);
      // Two inbound connections; Hello identifies which peer is which, but
      // the fixed dial order (A first, then B) already pins it in practice.
      out.to_a = listener.accept(timeout);
      out.to_b = listener.accept(timeout);
      break;
    }
  }
  return out;
}

}  // namespace p2n2
