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

#include <sstream>
#include <stdexcept>
#include <string>

namespace p2n2 {

// Base class for everything this library throws.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Value outside the representable/declared domain.
class RangeError : public Error {
 public:
  using Error::Error;
};

// Matrix/tensor dimension mismatch.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Wire/protocol violation: bad frame, wrong kind, seq gap, session mismatch,
// digest mismatch, peer abort.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// Blocking receive or handshake exceeded its deadline.
class TimeoutError : public ProtocolError {
 public:
  using ProtocolError::ProtocolError;
};

// Invalid user-supplied configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A finite resource (triple budget, channel) is exhausted or reused.
class ResourceError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf surfaced where finite values are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

// File/stream level failure.
class IoError : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void msg_append(std::ostringstream&) {}

template <typename T, typename... Rest>
void msg_append(std::ostringstream& os, const T& v, const Rest&... rest) {
  os << v;
  msg_append(os, rest...);
}

}  // namespace detail

template <typename E = Error, typename... Parts>
[[noreturn]] void raise(const Parts&... parts) {
  std::ostringstream os;
  detail::msg_append(os, parts...);
  throw E(os.str());
}

}  // namespace p2n2

// Lightweight invariant check with message streaming into the exception.
#define P2N2_REQUIRE(cond, ErrType, ...)              \
  do {                                                \
    if (!(cond)) {                                    \
      ::p2n2::raise<::p2n2::ErrType>(__VA_ARGS__);    \
    }                                                 \
  } while (0)
