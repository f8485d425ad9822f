// SPDX-FileCopyrightText: (c) 2026 tilert contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tilert/errors.hpp"

namespace tilert {

// Framed wire protocol for provisioning and inference over any reliable
// byte stream.
//
// Layout (little-endian): magic u32 = 0x31474541 ("AEG1"), msg_type u16,
// flags u16, payload_len u32, payload, crc u32. The CRC-32 covers
// msg_type‖flags‖payload_len‖payload — magic excluded so a receiver can
// resync by scanning for it. Max payload 16 MiB.

inline constexpr uint32_t kFrameMagic = 0x31474541;  // "AEG1"
inline constexpr uint32_t kMaxPayload = 16u << 20;
inline constexpr size_t kFrameHeaderSize = 12;  // magic + type + flags + len
inline constexpr uint16_t kDefaultPort = 7410;

enum class MsgType : uint16_t {
  LoadImage = 1,
  LoadPlan = 2,
  Run = 3,
  Result = 4,
  TelemetryReq = 5,
  Telemetry = 6,
  Ack = 7,
  Nack = 8,
};

const char* msg_type_name(MsgType t);

struct Frame {
  MsgType type = MsgType::Ack;
  uint16_t flags = 0;
  std::vector<uint8_t> payload;
  bool operator==(const Frame&) const = default;
};

/// Serializes with a freshly computed CRC. Throws FrameError(TooLarge).
std::vector<uint8_t> encode_frame(const Frame& f);

/// Parses exactly one frame (the whole buffer). Throws FrameError on
/// magic/type/length problems and IntegrityError on a CRC mismatch.
Frame decode_frame(std::span<const uint8_t> buf);

// NACK payload: one little-endian u32 code.
enum class NackCode : uint32_t {
  NotProvisioned = 1,  // RUN/LOAD_PLAN before the prerequisite LOAD_*
  Integrity = 2,       // frame failed its CRC
  BadRequest = 3,      // malformed payload, wrong size, unknown type
  ExecFailed = 4,      // pipeline raised an execution error
  TooLarge = 5,        // declared payload over the cap
  Internal = 6,
};

const char* nack_name(NackCode c);

Frame make_ack();
Frame make_nack(NackCode code);

/// Telemetry payload (36 bytes): inferences u64, input/compute/output stage
/// tick totals u64 each, last_error u32 (a NackCode, 0 = none).
struct Telemetry {
  uint64_t inferences = 0;
  std::array<uint64_t, 3> stage_ticks{};
  uint32_t last_error = 0;
  bool operator==(const Telemetry&) const = default;
};

std::vector<uint8_t> encode_telemetry(const Telemetry& t);
Telemetry decode_telemetry(std::span<const uint8_t> payload);

}  // namespace tilert
