// SPDX-FileCopyrightText: (c) 2026 tilert contributors
// SPDX-License-Identifier: Apache-2.0

#include "tilert/tcp.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "tilert/bytes.hpp"

namespace tilert {

namespace {

std::string errno_text(const char* op) {
  return std::string(op) + ": " + std::strerror(errno);
}

}  // namespace

TcpStream::~TcpStream() {
  if (fd_ >= 0) ::close(fd_);
}

TcpStream& TcpStream::operator=(TcpStream&& o) noexcept {
  if (this != &o) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = o.fd_;
    o.fd_ = -1;
  }
  return *this;
}

TcpStream TcpStream::connect(const std::string& host, uint16_t port) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw TransportError(errno_text("socket"));

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd);
    throw TransportError("bad address: " + host);
  }
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    const std::string msg = errno_text("connect");
    ::close(fd);
    throw TransportError(msg);
  }
  const int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return TcpStream(fd);
}

void TcpStream::write_all(std::span<const uint8_t> data) {
  size_t sent = 0;
  while (sent < data.size()) {
    const ssize_t n = ::send(fd_, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TransportError(errno_text("send"));
    }
    sent += static_cast<size_t>(n);
  }
}

void TcpStream::read_exact(std::span<uint8_t> out) {
  if (!read_exact_or_eof(out)) throw TransportError("connection closed mid-frame");
}

bool TcpStream::read_exact_or_eof(std::span<uint8_t> out) {
  size_t got = 0;
  while (got < out.size()) {
    const ssize_t n = ::recv(fd_, out.data() + got, out.size() - got, 0);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TransportError(errno_text("recv"));
    }
    if (n == 0) {
      if (got == 0) return false;
      throw TransportError("connection closed mid-frame");
    }
    got += static_cast<size_t>(n);
  }
  return true;
}

TcpListener::TcpListener(uint16_t port) : fd_(-1), port_(port) {
  fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd_ < 0) throw TransportError(errno_text("socket"));

  const int one = 1;
  ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);

  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(port);
  if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    const std::string msg = errno_text("bind");
    ::close(fd_);
    fd_ = -1;
    throw TransportError(msg);
  }
  if (::listen(fd_, 1) != 0) {
    const std::string msg = errno_text("listen");
    ::close(fd_);
    fd_ = -1;
    throw TransportError(msg);
  }
  socklen_t len = sizeof addr;
  if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len) == 0)
    port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() {
  if (fd_ >= 0) ::close(fd_);
}

std::optional<TcpStream> TcpListener::accept_client(int timeout_ms) {
  pollfd pfd{fd_, POLLIN, 0};
  while (true) {
    const int rc = ::poll(&pfd, 1, timeout_ms);
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw TransportError(errno_text("poll"));
    }
    if (rc == 0) return std::nullopt;
    break;
  }
  const int client = ::accept(fd_, nullptr, nullptr);
  if (client < 0) throw TransportError(errno_text("accept"));
  const int one = 1;
  ::setsockopt(client, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return TcpStream(client);
}

bool read_frame(TcpStream& s, Frame& out) {
  std::vector<uint8_t> buf(kFrameHeaderSize);
  if (!s.read_exact_or_eof(buf)) return false;

  // Validate what the header claims before trusting its length.
  const uint32_t magic = load_u32_le(buf.data());
  if (magic != kFrameMagic) throw FrameError(FrameError::Kind::Magic, "bad frame magic");
  const uint32_t len = load_u32_le(buf.data() + 8);
  if (len > kMaxPayload)
    throw FrameError(FrameError::Kind::TooLarge,
                     "declared payload of " + std::to_string(len) + " bytes exceeds cap");

  buf.resize(kFrameHeaderSize + len + 4);
  s.read_exact(std::span<uint8_t>(buf).subspan(kFrameHeaderSize));
  out = decode_frame(buf);
  return true;
}

void write_frame(TcpStream& s, const Frame& f) { s.write_all(encode_frame(f)); }

}  // namespace tilert
