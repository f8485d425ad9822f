// SPDX-FileCopyrightText: (c) 2026 tilert contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "tilert/frame.hpp"

namespace tilert {

/// Blocking stream socket with exact-length I/O. Move-only RAII over the fd.
class TcpStream {
 public:
  explicit TcpStream(int fd) : fd_(fd) {}
  ~TcpStream();
  TcpStream(TcpStream&& o) noexcept : fd_(o.fd_) { o.fd_ = -1; }
  TcpStream& operator=(TcpStream&& o) noexcept;
  TcpStream(const TcpStream&) = delete;
  TcpStream& operator=(const TcpStream&) = delete;

  static TcpStream connect(const std::string& host, uint16_t port);

  void write_all(std::span<const uint8_t> data);  // throws TransportError
  void read_exact(std::span<uint8_t> out);        // throws TransportError on EOF
  /// Like read_exact but a clean EOF before the first byte returns false.
  bool read_exact_or_eof(std::span<uint8_t> out);

  int fd() const { return fd_; }

 private:
  int fd_;
};

/// Loopback listener (one pending connection). Port 0 binds an ephemeral
/// port; port() reports the actual one.
class TcpListener {
 public:
  explicit TcpListener(uint16_t port);  // throws TransportError (e.g. port in use)
  ~TcpListener();
  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  /// Blocks up to timeout_ms for a client; returns nullopt on timeout.
  /// timeout_ms < 0 blocks indefinitely.
  std::optional<TcpStream> accept_client(int timeout_ms = -1);

  uint16_t port() const { return port_; }

 private:
  int fd_;
  uint16_t port_;
};

// Framed I/O over a stream. The reader first consumes the 12-byte header to
// learn the payload length, then the remainder, and hands the whole buffer
// to decode_frame so every validation path is shared with the in-memory
// codec. Length errors are fatal for the connection (framing is lost); a CRC
// mismatch is not (the stream stays aligned), so IntegrityError propagates
// and the caller may keep reading.

/// Returns false on clean EOF at a frame boundary.
bool read_frame(TcpStream& s, Frame& out);
void write_frame(TcpStream& s, const Frame& f);

}  // namespace tilert
