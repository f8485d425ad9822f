// SPDX-FileCopyrightText: (c) 2026 tilert contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tilert/model.hpp"
#include "tilert/runtime.hpp"
#include "tilert/tcp.hpp"

namespace tilert {

// Wire service: one RuntimeSession behind the framed protocol. Request ->
// reply mapping:
//
//   LOAD_IMAGE(image bytes)          -> ACK | NACK
//   LOAD_PLAN(plan payload, below)   -> ACK | NACK
//   RUN(input tensors)               -> RESULT(output tensors) | NACK
//   TELEMETRY_REQ()                  -> TELEMETRY(36-byte payload)
//
// A CRC mismatch NACKs with Integrity and keeps the connection (framing is
// intact); a malformed header closes it (framing is lost). The listener
// binds loopback only.

// LOAD_PLAN payload: u32 rcb_count, then rcb_count x { u32 len, encoded
// block }, then u32 manifest_len + manifest JSON.
std::vector<uint8_t> encode_plan_payload(const std::vector<std::vector<uint8_t>>& rcbs,
                                         const ModelManifest& manifest);
void decode_plan_payload(std::span<const uint8_t> payload,
                         std::vector<std::vector<uint8_t>>& rcbs_out,
                         ModelManifest& manifest_out);  // throws FormatError(Truncated)

struct ServeOptions {
  uint16_t port = kDefaultPort;  // 0 binds an ephemeral port
  SimConfig sim;
  int accept_timeout_ms = 200;  // stop-flag poll granularity
};

class Server {
 public:
  explicit Server(const ServeOptions& opts = {});

  uint16_t port() const { return listener_.port(); }
  RuntimeSession& session() { return session_; }

  /// Accept loop: serves one connection at a time until stop(). Returns the
  /// number of connections served.
  size_t serve();
  void stop() { stop_.store(true); }

  /// Accepts one connection and serves it to completion. Returns false when
  /// no client arrived within timeout_ms (never with a negative timeout).
  bool serve_one(int timeout_ms = -1);

  /// Serves one already-connected stream until the peer hangs up (test and
  /// single-shot hook). Frame-level protocol errors that lose framing close
  /// the connection after a best-effort NACK.
  void handle_connection(TcpStream& stream);

 private:
  Frame handle_request(const Frame& request);

  ServeOptions opts_;
  TcpListener listener_;
  RuntimeSession session_;
  std::atomic<bool> stop_{false};
};

/// Client side of the protocol. Each call sends one frame and blocks for
/// the reply; a NACK reply raises ServiceError carrying the code.
class Client {
 public:
  static Client connect(const std::string& host, uint16_t port);

  void load_image(std::span<const uint8_t> image);
  void load_plan(const std::vector<std::vector<uint8_t>>& rcbs, const ModelManifest& manifest);
  /// load_image + load_plan from a packed model.
  void load_model(const CompiledModel& model);
  std::vector<uint8_t> run(std::span<const uint8_t> input);
  Telemetry telemetry();

  /// Sends a raw frame and returns the reply (protocol tests).
  Frame roundtrip(const Frame& request);
  TcpStream& stream() { return stream_; }

 private:
  explicit Client(TcpStream stream) : stream_(std::move(stream)) {}
  Frame expect(MsgType type, const Frame& request);

  TcpStream stream_;
};

}  // namespace tilert
