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
#include <memory>
#include <string>

#include "p2n2/channel.hpp"

namespace p2n2 {

// host:port with defaulting helpers.
struct HostPort {
  std::string host = "127.0.0.1";
  uint16_t port = 0;

  static HostPort parse(const std::string& s);
  std::string str() const { return host + ":" + std::to_string(port); }
};

// Accepting side of one or more TCP channels. Binding to port 0 picks an
// ephemeral port, exposed by port().
class TcpListener {
 public:
  explicit TcpListener(const HostPort& bind_addr);
  ~TcpListener();

  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  uint16_t port() const { return port_; }
  ChannelPtr accept(std::chrono::milliseconds timeout);
  void close();

 private:
  int fd_ = -1;
  uint16_t port_ = 0;
};

// Dials with retry until the deadline; the listener may come up later.
ChannelPtr tcp_connect(const HostPort& addr, std::chrono::milliseconds timeout);

}  // namespace p2n2
