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

#include <cstdint>
#include <string>

#include "p2n2/errors.hpp"

namespace p2n2 {

// The three protocol roles. HolderA always owns the labels.
enum class RoleId : uint8_t { HolderA = 0, HolderB = 1, Server = 2 };

inline const char* role_name(RoleId r) {
  switch (r) {
    case RoleId::HolderA: return "holder-a";
    case RoleId::HolderB: return "holder-b";
    case RoleId::Server: return "server";
  }
  return "?";
}

inline RoleId role_from_string(const std::string& s) {
  if (s == "holder-a" || s == "a") return RoleId::HolderA;
  if (s == "holder-b" || s == "b") return RoleId::HolderB;
  if (s == "server" || s == "s") return RoleId::Server;
  raise<ConfigError>("unknown role '", s, "' (expected holder-a|holder-b|server)");
}

// Share index within the two-party computation; A holds index 1, B index 2.
enum class PartyId : uint8_t { A = 0, B = 1 };

inline const char* party_name(PartyId p) { return p == PartyId::A ? "A" : "B"; }

}  // namespace p2n2
