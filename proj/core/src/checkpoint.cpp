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

#include "p2n2/checkpoint.hpp"

#include <cstring>
#include <fstream>

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

void put_f64(std::vector<uint8_t>& out, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, 8);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(bits >> (8 * i)));
}

struct Reader {
  const uint8_t* p;
  size_t remaining;

  void need(size_t n, const char* what) {
    P2N2_REQUIRE(remaining >= n, IoError, "truncated checkpoint while reading ", what);
  }
  uint16_t u16(const char* what) {
    need(2, what);
    uint16_t v = static_cast<uint16_t>(p[0]) | static_cast<uint16_t>(p[1]) << 8;
    p += 2;
    remaining -= 2;
    return v;
  }
  uint32_t u32(const char* what) {
    need(4, what);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(p[i]) << (8 * i);
    p += 4;
    remaining -= 4;
    return v;
  }
  double f64(const char* what) {
    need(8, what);
    uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<uint64_t>(p[i]) << (8 * i);
    p += 8;
    remaining -= 8;
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
};

}  // namespace

void Checkpoint::put(const std::string& name, Tensor t) {
  for (auto& e : entries_) {
    if (e.name == name) {
      e.value = std::move(t);
      return;
    }
  }
  entries_.push_back({name, std::move(t)});
}

const Tensor& Checkpoint::get(const std::string& name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return e.value;
  }
  raise<IoError>("checkpoint has no tensor named '", name, "'");
}

bool Checkpoint::contains(const std::string& name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return true;
  }
  return false;
}

std::vector<uint8_t> Checkpoint::serialize() const {
  std::vector<uint8_t> out;
  out.insert(out.end(), kMagic, kMagic + 4);
  put_u16(out, kVersion);
  for (const auto& e : entries_) {
    put_u32(out, static_cast<uint32_t>(e.name.size()));
    out.insert(out.end(), e.name.begin(), e.name.end());
    put_u32(out, static_cast<uint32_t>(e.value.rows()));
    put_u32(out, static_cast<uint32_t>(e.value.cols()));
    for (size_t i = 0; i < e.value.size(); ++i) put_f64(out, e.value.data()[i]);
  }
  return out;
}

Checkpoint Checkpoint::deserialize(const std::vector<uint8_t>& bytes) {
  P2N2_REQUIRE(bytes.size() >= 6, IoError, "checkpoint shorter than header");
  P2N2_REQUIRE(std::memcmp(bytes.data(), kMagic, 4) == 0, IoError,
               "bad checkpoint magic");
  Reader r{bytes.data() + 4, bytes.size() - 4};
  const uint16_t version = r.u16("version");
  P2N2_REQUIRE(version == kVersion, IoError, "unsupported checkpoint version ", version);
  Checkpoint ck;
  while (r.remaining > 0) {
    const uint32_t name_len = r.u32("name length");
    r.need(name_len, "name");
    std::string name(reinterpret_cast<const char*>(r.p), name_len);
    r.p += name_len;
    r.remaining -= name_len;
    const uint32_t rows = r.u32("rows");
    const uint32_t cols = r.u32("cols");
    P2N2_REQUIRE(rows > 0 && cols > 0, IoError, "tensor '", name, "' has zero dims");
    Tensor t(rows, cols);
    for (size_t i = 0; i < t.size(); ++i) t.data()[i] = r.f64("tensor data");
    ck.entries_.push_back({std::move(name), std::move(t)});
  }
  return ck;
}

void Checkpoint::save(const std::string& path) const {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  P2N2_REQUIRE(f.good(), IoError, "cannot open '", path, "' for writing");
  const auto bytes = serialize();
  f.write(reinterpret_cast<const char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  P2N2_REQUIRE(f.good(), IoError, "short write to '", path, "'");
}

Checkpoint Checkpoint::load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  P2N2_REQUIRE(f.good(), IoError, "cannot open '", path, "'");
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                             std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

}  // namespace p2n2
