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
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "p2n2/fixed.hpp"
#include "p2n2/tensor.hpp"

namespace p2n2 {

// Typed protocol frames. Wire layout (all little-endian):
//   magic "P2N2" (4) | version u16 | kind u8 | session_id (16) | seq u64 |
//   payload_len u32 | payload bytes
enum class MsgKind : uint8_t {
  Hello = 0,
  Config = 1,
  ShareBlock = 2,
  HiddenActivations = 3,
  Gradient = 4,
  DefenderStats = 5,
  TraceRecord = 6,
  Abort = 7,
};

const char* msg_kind_name(MsgKind k);

using SessionId = std::array<uint8_t, 16>;

struct Message {
  SessionId session_id{};
  uint64_t seq = 0;
  MsgKind kind = MsgKind::Hello;
  std::vector<uint8_t> payload;
};

constexpr uint16_t kWireVersion = 1;
constexpr size_t kFrameHeaderSize = 4 + 2 + 1 + 16 + 8 + 4;

// Frame <-> bytes. decode_frame throws ProtocolError on malformed input.
std::vector<uint8_t> encode_frame(const Message& m);
Message decode_frame(const std::vector<uint8_t>& bytes);
// Header-only decode used by stream readers: returns (kind, session, seq,
// payload_len) from a kFrameHeaderSize prefix.
struct FrameHeader {
  uint16_t version;
  MsgKind kind;
  SessionId session_id;
  uint64_t seq;
  uint32_t payload_len;
};
FrameHeader decode_frame_header(const uint8_t* bytes, size_t len);

// Matrix payload: rows u32 | cols u32 | elem_kind u8 (0 ring, 1 real) |
// elements LE row-major.
std::vector<uint8_t> encode_ring_matrix(const FxMatrix& m);
std::vector<uint8_t> encode_real_matrix(const Tensor& t);
FxMatrix decode_ring_matrix(const std::vector<uint8_t>& payload);
Tensor decode_real_matrix(const std::vector<uint8_t>& payload);
// Peeks the elem_kind byte; 0 = ring, 1 = real.
uint8_t matrix_elem_kind(const std::vector<uint8_t>& payload);

// Small scalar payloads (DefenderStats, TraceRecord, Abort reason).
std::vector<uint8_t> encode_f64_u64s(const std::vector<double>& ds,
                                     const std::vector<uint64_t>& us);
void decode_f64_u64s(const std::vector<uint8_t>& payload, size_t nd, size_t nu,
                     std::vector<double>* ds, std::vector<uint64_t>* us);

}  // namespace p2n2
