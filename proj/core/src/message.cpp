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

#include "p2n2/message.hpp"

#include <cstring>

#include "p2n2/errors.hpp"

namespace p2n2 {

namespace {

constexpr char kMagic[4] = {'P', '2', 'N', '2'};

void put_u16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v));
  out.push_back(static_cast<uint8_t>(v >> 8));
}

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<uint8_t>& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

uint16_t get_u16(const uint8_t* p) {
  return static_cast<uint16_t>(p[0]) | static_cast<uint16_t>(p[1]) << 8;
}

uint32_t get_u32(const uint8_t* p) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(p[i]) << (8 * i);
  return v;
}

uint64_t get_u64(const uint8_t* p) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[i]) << (8 * i);
  return v;
}

}  // namespace

const char* msg_kind_name(MsgKind k) {
  switch (k) {
    case MsgKind::Hello: return "Hello";
    case MsgKind::Config: return "Config";
    case MsgKind::ShareBlock: return "ShareBlock";
    case MsgKind::HiddenActivations: return "HiddenActivations";
    case MsgKind::Gradient: return "Gradient";
    case MsgKind::DefenderStats: return "DefenderStats";
    case MsgKind::TraceRecord: return "TraceRecord";
    case MsgKind::Abort: return "Abort";
  }
  return "?";
}

std::vector<uint8_t> encode_frame(const Message& m) {
  std::vector<uint8_t> out;
  out.reserve(kFrameHeaderSize + m.payload.size());
  out.insert(out.end(), kMagic, kMagic + 4);
  put_u16(out, kWireVersion);
  out.push_back(static_cast<uint8_t>(m.kind));
  out.insert(out.end(), m.session_id.begin(), m.session_id.end());
  put_u64(out, m.seq);
  put_u32(out, static_cast<uint32_t>(m.payload.size()));
  out.insert(out.end(), m.payload.begin(), m.payload.end());
  return out;
}

FrameHeader decode_frame_header(const uint8_t* bytes, size_t len) {
  P2N2_REQUIRE(len >= kFrameHeaderSize, ProtocolError, "frame header truncated");
  P2N2_REQUIRE(std::memcmp(bytes, kMagic, 4) == 0, ProtocolError,
               "bad frame magic");
  FrameHeader h;
  h.version = get_u16(bytes + 4);
  P2N2_REQUIRE(h.version == kWireVersion, ProtocolError, "unsupported wire version ",
               h.version);
  const uint8_t kind = bytes[6];
  P2N2_REQUIRE(kind <= static_cast<uint8_t>(MsgKind::Abort), ProtocolError,
               "unknown message kind ", static_cast<int>(kind));
  h.kind = static_cast<MsgKind>(kind);
  std::memcpy(h.session_id.data(), bytes + 7, 16);
  h.seq = get_u64(bytes + 23);
  h.payload_len = get_u32(bytes + 31);
  return h;
}

Message decode_frame(const std::vector<uint8_t>& bytes) {
  FrameHeader h = decode_frame_header(bytes.data(), bytes.size());
  P2N2_REQUIRE(bytes.size() == kFrameHeaderSize + h.payload_len, ProtocolError,
               "frame length ", bytes.size(), " != header-declared ",
               kFrameHeaderSize + h.payload_len);
  Message m;
  m.session_id = h.session_id;
  m.seq = h.seq;
  m.kind = h.kind;
  m.payload.assign(bytes.begin() + kFrameHeaderSize, bytes.end());
  return m;
}

std::vector<uint8_t> encode_ring_matrix(const FxMatrix& m) {
  std::vector<uint8_t> out;
  out.reserve(9 + m.size() * 8);
  put_u32(out, static_cast<uint32_t>(m.rows()));
  put_u32(out, static_cast<uint32_t>(m.cols()));
  out.push_back(0);
  for (size_t i = 0; i < m.size(); ++i) put_u64(out, m.data()[i]);
  return out;
}

std::vector<uint8_t> encode_real_matrix(const Tensor& t) {
  std::vector<uint8_t> out;
  out.reserve(9 + t.size() * 8);
  put_u32(out, static_cast<uint32_t>(t.rows()));
  put_u32(out, static_cast<uint32_t>(t.cols()));
  out.push_back(1);
  for (size_t i = 0; i < t.size(); ++i) {
    uint64_t bits;
    std::memcpy(&bits, &t.data()[i], 8);
    put_u64(out, bits);
  }
  return out;
}

uint8_t matrix_elem_kind(const std::vector<uint8_t>& payload) {
  P2N2_REQUIRE(payload.size() >= 9, ProtocolError, "matrix payload truncated");
  return payload[8];
}

namespace {

void check_matrix_payload(const std::vector<uint8_t>& payload, uint8_t want_kind,
                          uint32_t* rows, uint32_t* cols) {
  P2N2_REQUIRE(payload.size() >= 9, ProtocolError, "matrix payload truncated");
  *rows = get_u32(payload.data());
  *cols = get_u32(payload.data() + 4);
  const uint8_t ek = payload[8];
  P2N2_REQUIRE(ek == want_kind, ProtocolError, "matrix elem kind ", static_cast<int>(ek),
               ", expected ", static_cast<int>(want_kind));
  const size_t expect = 9 + static_cast<size_t>(*rows) * *cols * 8;
  P2N2_REQUIRE(payload.size() == expect, ProtocolError, "matrix payload length ",
               payload.size(), " != expected ", expect);
}

}  // namespace

FxMatrix decode_ring_matrix(const std::vector<uint8_t>& payload) {
  uint32_t rows, cols;
  check_matrix_payload(payload, 0, &rows, &cols);
  FxMatrix m(rows, cols);
  for (size_t i = 0; i < m.size(); ++i) m.data()[i] = get_u64(payload.data() + 9 + i * 8);
  return m;
}

Tensor decode_real_matrix(const std::vector<uint8_t>& payload) {
  uint32_t rows, cols;
  check_matrix_payload(payload, 1, &rows, &cols);
  Tensor t(rows, cols);
  for (size_t i = 0; i < t.size(); ++i) {
    const uint64_t bits = get_u64(payload.data() + 9 + i * 8);
    std::memcpy(&t.data()[i], &bits, 8);
  }
  return t;
}

std::vector<uint8_t> encode_f64_u64s(const std::vector<double>& ds,
                                     const std::vector<uint64_t>& us) {
  std::vector<uint8_t> out;
  for (double d : ds) {
    uint64_t bits;
    std::memcpy(&bits, &d, 8);
    put_u64(out, bits);
  }
  for (uint64_t u : us) put_u64(out, u);
  return out;
}

void decode_f64_u64s(const std::vector<uint8_t>& payload, size_t nd, size_t nu,
                     std::vector<double>* ds, std::vector<uint64_t>* us) {
  P2N2_REQUIRE(payload.size() == (nd + nu) * 8, ProtocolError,
               "scalar payload length ", payload.size(), " != ", (nd + nu) * 8);
  if (ds != nullptr) {
    ds->resize(nd);
    for (size_t i = 0; i < nd; ++i) {
      const uint64_t bits = get_u64(payload.data() + i * 8);
      std::memcpy(&(*ds)[i], &bits, 8);
    }
  }
  if (us != nullptr) {
    us->resize(nu);
    for (size_t i = 0; i < nu; ++i) (*us)[i] = get_u64(payload.data() + (nd + i) * 8);
  }
}

}  // namespace p2n2
