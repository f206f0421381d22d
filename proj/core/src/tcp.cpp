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

#include "p2n2/tcp.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <thread>

#include "p2n2/errors.hpp"

namespace p2n2 {

namespace {

using Clock = std::chrono::steady_clock;

void set_nodelay(int fd) {
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

// Waits until fd is readable or the deadline passes.
void wait_readable(int fd, Clock::time_point deadline) {
  for (;;) {
    const auto now = Clock::now();
    if (now >= deadline) raise<TimeoutError>("tcp recv timed out");
    const auto left =
        std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now);
    struct pollfd pfd{fd, POLLIN, 0};
    const int rc = ::poll(&pfd, 1, static_cast<int>(std::max<int64_t>(1, left.count())));
    if (rc > 0) return;
    if (rc == 0) continue;
    if (errno == EINTR) continue;
    raise<ProtocolError>("poll failed: ", std::strerror(errno));
  }
}

void read_exact(int fd, uint8_t* buf, size_t n, Clock::time_point deadline) {
  size_t done = 0;
  while (done < n) {
    wait_readable(fd, deadline);
    const ssize_t rc = ::recv(fd, buf + done, n - done, 0);
    if (rc > 0) {
      done += static_cast<size_t>(rc);
      continue;
    }
    if (rc == 0) raise<ProtocolError>("tcp peer closed the connection");
    if (errno == EINTR || errno == EAGAIN || errno == EWOULDBLOCK) continue;
    raise<ProtocolError>("tcp recv failed: ", std::strerror(errno));
  }
}

void write_all(int fd, const uint8_t* buf, size_t n) {
  size_t done = 0;
  while (done < n) {
    const ssize_t rc = ::send(fd, buf + done, n - done, MSG_NOSIGNAL);
    if (rc > 0) {
      done += static_cast<size_t>(rc);
      continue;
    }
    if (rc < 0 && errno == EINTR) continue;
    raise<ProtocolError>("tcp send failed: ", std::strerror(errno));
  }
}

class TcpChannel final : public Channel {
 public:
  explicit TcpChannel(int fd) : fd_(fd) { set_nodelay(fd_); }
  ~TcpChannel() override { close(); }

  void send(const Message& m) override {
    P2N2_REQUIRE(fd_ >= 0, ProtocolError, "send on closed tcp channel");
    const auto bytes = encode_frame(m);
    write_all(fd_, bytes.data(), bytes.size());
    note_sent(m, bytes.size());
  }

  Message recv(std::chrono::milliseconds timeout) override {
    P2N2_REQUIRE(fd_ >= 0, ProtocolError, "recv on closed tcp channel");
    const auto deadline = Clock::now() + timeout;
    uint8_t header[kFrameHeaderSize];
    read_exact(fd_, header, sizeof(header), deadline);
    const FrameHeader h = decode_frame_header(header, sizeof(header));
    Message m;
    m.session_id = h.session_id;
    m.seq = h.seq;
    m.kind = h.kind;
    m.payload.resize(h.payload_len);
    if (h.payload_len > 0) read_exact(fd_, m.payload.data(), h.payload_len, deadline);
    note_recv(m, kFrameHeaderSize + m.payload.size());
    return m;
  }

  void close() override {
    if (fd_ >= 0) {
      ::shutdown(fd_, SHUT_RDWR);
      ::close(fd_);
      fd_ = -1;
    }
  }

 private:
  int fd_;
};

sockaddr_in make_addr(const HostPort& hp) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(hp.port);
  P2N2_REQUIRE(::inet_pton(AF_INET, hp.host.c_str(), &addr.sin_addr) == 1, ConfigError,
               "bad IPv4 address '", hp.host, "'");
  return addr;
}

}  // namespace

HostPort HostPort::parse(const std::string& s) {
  const auto colon = s.rfind(':');
  P2N2_REQUIRE(colon != std::string::npos && colon + 1 < s.size(), ConfigError,
               "expected host:port, got '", s, "'");
  HostPort hp;
  hp.host = s.substr(0, colon);
  if (hp.host.empty() || hp.host == "localhost") hp.host = "127.0.0.1";
  if (hp.host == "0.0.0.0") hp.host = "0.0.0.0";
  const long port = std::strtol(s.c_str() + colon + 1, nullptr, 10);
  P2N2_REQUIRE(port > 0 && port < 65536, ConfigError, "bad port in '", s, "'");
  hp.port = static_cast<uint16_t>(port);
  return hp;
}

TcpListener::TcpListener(const HostPort& bind_addr) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  P2N2_REQUIRE(fd_ >= 0, ProtocolError, "socket failed: ", std::strerror(errno));
  int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr = make_addr(bind_addr);
  P2N2_REQUIRE(::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0,
               ProtocolError, "bind ", bind_addr.str(), " failed: ",
               std::strerror(errno));
  P2N2_REQUIRE(::listen(fd_, 16) == 0, ProtocolError, "listen failed: ",
               std::strerror(errno));
  socklen_t len = sizeof(addr);
  ::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() { close(); }

ChannelPtr TcpListener::accept(std::chrono::milliseconds timeout) {
  P2N2_REQUIRE(fd_ >= 0, ProtocolError, "accept on closed listener");
  wait_readable(fd_, Clock::now() + timeout);
  const int cfd = ::accept(fd_, nullptr, nullptr);
  P2N2_REQUIRE(cfd >= 0, ProtocolError, "accept failed: ", std::strerror(errno));
  return std::make_shared<TcpChannel>(cfd);
}

void TcpListener::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

ChannelPtr tcp_connect(const HostPort& addr, std::chrono::milliseconds timeout) {
  const auto deadline = Clock::now() + timeout;
  sockaddr_in sa = make_addr(addr);
  for (;;) {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    P2N2_REQUIRE(fd >= 0, ProtocolError, "socket failed: ", std::strerror(errno));
    if (::connect(fd, reinterpret_cast<sockaddr*>(&sa), sizeof(sa)) == 0) {
      return std::make_shared<TcpChannel>(fd);
    }
    ::close(fd);
    if (Clock::now() >= deadline) {
      raise<TimeoutError>("connect to ", addr.str(), " timed out");
    }
    // Peer may not be listening yet.
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
}

}  // namespace p2n2
