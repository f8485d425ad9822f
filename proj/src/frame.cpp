// SPDX-FileCopyrightText: (c) 2026 tilert contributors
// SPDX-License-Identifier: Apache-2.0

#include "tilert/frame.hpp"

#include "tilert/bytes.hpp"
#include "tilert/crc32.hpp"

namespace tilert {

const char* msg_type_name(MsgType t) {
  switch (t) {
    case MsgType::LoadImage: return "LOAD_IMAGE";
    case MsgType::LoadPlan: return "LOAD_PLAN";
    case MsgType::Run: return "RUN";
    case MsgType::Result: return "RESULT";
    case MsgType::TelemetryReq: return "TELEMETRY_REQ";
    case MsgType::Telemetry: return "TELEMETRY";
    case MsgType::Ack: return "ACK";
    case MsgType::Nack: return "NACK";
  }
  return "UNKNOWN";
}

const char* nack_name(NackCode c) {
  switch (c) {
    case NackCode::NotProvisioned: return "NOT_PROVISIONED";
    case NackCode::Integrity: return "INTEGRITY";
    case NackCode::BadRequest: return "BAD_REQUEST";
    case NackCode::ExecFailed: return "EXEC_FAILED";
    case NackCode::TooLarge: return "TOO_LARGE";
    case NackCode::Internal: return "INTERNAL";
  }
  return "UNKNOWN";
}

std::vector<uint8_t> encode_frame(const Frame& f) {
  if (f.payload.size() > kMaxPayload)
    throw FrameError(FrameError::Kind::TooLarge,
                     "payload of " + std::to_string(f.payload.size()) + " bytes exceeds cap");
  ByteWriter w;
  w.u32(kFrameMagic);
  w.u16(static_cast<uint16_t>(f.type));
  w.u16(f.flags);
  w.u32(static_cast<uint32_t>(f.payload.size()));
  w.bytes(f.payload.data(), f.payload.size());

  auto buf = w.take();
  // CRC over everything after the magic.
  const uint32_t crc = crc32(std::span<const uint8_t>(buf).subspan(4));
  ByteWriter tail;
  tail.u32(crc);
  auto t = tail.take();
  buf.insert(buf.end(), t.begin(), t.end());
  return buf;
}

Frame decode_frame(std::span<const uint8_t> buf) {
  if (buf.size() < kFrameHeaderSize + 4)
    throw FrameError(FrameError::Kind::Truncated,
                     "frame shorter than header: " + std::to_string(buf.size()) + " bytes");
  ByteReader r(buf);
  if (r.u32() != kFrameMagic) throw FrameError(FrameError::Kind::Magic, "bad frame magic");
  const uint16_t type = r.u16();
  if (type < 1 || type > 8)
    throw FrameError(FrameError::Kind::Type, "unknown message type " + std::to_string(type));
  Frame f;
  f.type = static_cast<MsgType>(type);
  f.flags = r.u16();
  const uint32_t len = r.u32();
  if (len > kMaxPayload)
    throw FrameError(FrameError::Kind::TooLarge,
                     "declared payload of " + std::to_string(len) + " bytes exceeds cap");
  if (buf.size() != kFrameHeaderSize + size_t{len} + 4)
    throw FrameError(FrameError::Kind::Truncated,
                     "frame length mismatch: have " + std::to_string(buf.size()) + ", expect " +
                         std::to_string(kFrameHeaderSize + size_t{len} + 4));
  auto payload = r.bytes(len);
  f.payload.assign(payload.begin(), payload.end());
  const uint32_t got = r.u32();
  const uint32_t want = crc32(buf.subspan(4, kFrameHeaderSize - 4 + len));
  if (got != want)
    throw IntegrityError(want, got, "frame CRC mismatch");
  return f;
}

Frame make_ack() { return Frame{MsgType::Ack, 0, {}}; }

Frame make_nack(NackCode code) {
  ByteWriter w;
  w.u32(static_cast<uint32_t>(code));
  return Frame{MsgType::Nack, 0, w.take()};
}

std::vector<uint8_t> encode_telemetry(const Telemetry& t) {
  ByteWriter w;
  w.u64(t.inferences);
  for (uint64_t s : t.stage_ticks) w.u64(s);
  w.u32(t.last_error);
  return w.take();
}

Telemetry decode_telemetry(std::span<const uint8_t> payload) {
  if (payload.size() != 36)
    throw FrameError(FrameError::Kind::Truncated,
                     "telemetry payload must be 36 bytes, got " + std::to_string(payload.size()));
  ByteReader r(payload);
  Telemetry t;
  t.inferences = r.u64();
  for (auto& s : t.stage_ticks) s = r.u64();
  t.last_error = r.u32();
  return t;
}

}  // namespace tilert
