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

#include <string>
#include <utility>
#include <vector>

#include "p2n2/tensor.hpp"

namespace p2n2 {

// Self-describing binary tensor container. Layout:
//   magic "P2N2" | version u16 LE | per tensor:
//     name_len u32 LE | name bytes | rows u32 LE | cols u32 LE |
//     rows*cols f64 LE (row-major)
// Tensors repeat until end of file.
struct NamedTensor {
  std::string name;
  Tensor value;
};

class Checkpoint {
 public:
  static constexpr uint16_t kVersion = 1;

  void put(const std::string& name, Tensor t);
  const Tensor& get(const std::string& name) const;
  bool contains(const std::string& name) const;
  const std::vector<NamedTensor>& entries() const { return entries_; }

  std::vector<uint8_t> serialize() const;
  static Checkpoint deserialize(const std::vector<uint8_t>& bytes);

  void save(const std::string& path) const;
  static Checkpoint load(const std::string& path);

 private:
  std::vector<NamedTensor> entries_;
};

}  // namespace p2n2
