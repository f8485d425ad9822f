// SPDX-FileCopyrightText: (c) 2026 tilert contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "tilert/errors.hpp"
#include "tilert/hal.hpp"

namespace tilert {

// Runtime Control Block: a command stream encoded as data. A block carries a
// header, a dependency list and an ordered sequence of hardware operations
// that a generic executor replays against a HAL backend.
//
// Binary layout (all little-endian):
//   header (20 bytes):
//     magic        u32 = 0x31424352 ("RCB1")
//     version      u16 = 1
//     block_type   u16   (0=COMPUTE, 1=TRANSFER, 2=CONFIG)
//     op_count     u32
//     payload_size u32   bytes of the operation stream after the dep section
//     dep_count    u16
//     reserved     u16 = 0
//   dependency section: dep_count x u32
//   operation stream: per op, opcode u16 + flags u16 + operands (see encode).
//
// An AddrRef encodes as 12 bytes: kind u8, pad u8, then 10 bytes of
// kind-specific payload (padded). Operation records are 4-byte aligned;
// WRITE_BLOCK inline data is padded up to the next word boundary.

inline constexpr uint32_t kRcbMagic = 0x31424352;  // "RCB1"
inline constexpr uint16_t kRcbVersion = 1;

enum class OpCode : uint16_t {
  RegWrite = 0x01,
  RegRead = 0x02,
  WriteBlock = 0x03,
  DmaTrigger = 0x04,
  PollMask = 0x05,
  CacheFlush = 0x06,
  CacheInvalidate = 0x07,
  WaitEvent = 0x08,
};

const char* opcode_name(OpCode op);

enum class BlockType : uint16_t {
  Compute = 0,
  Transfer = 1,
  Config = 2,
};

enum class AddrKind : uint8_t {
  Absolute = 0,
  RelativeTile = 1,
  Symbolic = 2,
};

/// A target address in an operation. SYMBOLIC refs are the only refs allowed
/// to stay unresolved until the binding layer runs; RELATIVE_TILE refs name a
/// byte offset within one tile's register/local-memory window.
struct AddrRef {
  AddrKind kind = AddrKind::Absolute;

  uint64_t addr = 0;  // Absolute

  uint16_t col = 0;  // RelativeTile
  uint16_t row = 0;
  uint32_t tile_offset = 0;

  uint32_t buffer_id = 0;  // Symbolic
  uint32_t offset = 0;

  static AddrRef absolute(uint64_t addr) {
    AddrRef r;
    r.kind = AddrKind::Absolute;
    r.addr = addr;
    return r;
  }

  static AddrRef tile(uint16_t col, uint16_t row, uint32_t tile_offset) {
    AddrRef r;
    r.kind = AddrKind::RelativeTile;
    r.col = col;
    r.row = row;
    r.tile_offset = tile_offset;
    return r;
  }

  static AddrRef symbolic(uint32_t buffer_id, uint32_t offset) {
    AddrRef r;
    r.kind = AddrKind::Symbolic;
    r.buffer_id = buffer_id;
    r.offset = offset;
    return r;
  }

  bool operator==(const AddrRef& o) const;
};

struct RegWriteOp {
  AddrRef addr;
  uint32_t value = 0;
  bool operator==(const RegWriteOp&) const = default;
};

struct RegReadOp {
  AddrRef addr;
  uint32_t capture_slot = 0;  // index into the executor's capture-slot array
  bool operator==(const RegReadOp&) const = default;
};

struct WriteBlockOp {
  AddrRef addr;
  std::vector<uint8_t> data;
  bool operator==(const WriteBlockOp&) const = default;
};

struct DmaTriggerOp {
  DmaDir direction = DmaDir::ToDevice;
  AddrRef src;
  AddrRef dst;
  uint32_t length = 0;  // bytes, must be > 0
  bool operator==(const DmaTriggerOp&) const = default;
};

struct PollMaskOp {
  AddrRef addr;
  uint32_t mask = 0;
  uint32_t expected = 0;
  uint32_t timeout_us = 0;  // virtual-clock microseconds, must be > 0
  bool operator==(const PollMaskOp&) const = default;
};

struct CacheFlushOp {
  AddrRef addr;
  uint32_t length = 0;
  bool operator==(const CacheFlushOp&) const = default;
};

struct CacheInvalidateOp {
  AddrRef addr;
  uint32_t length = 0;
  bool operator==(const CacheInvalidateOp&) const = default;
};

struct WaitEventOp {
  uint32_t event_id = 0;
  bool operator==(const WaitEventOp&) const = default;
};

using OpPayload = std::variant<RegWriteOp, RegReadOp, WriteBlockOp, DmaTriggerOp, PollMaskOp,
                               CacheFlushOp, CacheInvalidateOp, WaitEventOp>;

struct Operation {
  uint16_t flags = 0;
  OpPayload payload;

  // Variant alternatives are declared in opcode order, so index+1 is the code.
  OpCode opcode() const { return static_cast<OpCode>(payload.index() + 1); }

  bool operator==(const Operation&) const = default;
};

struct Rcb {
  BlockType block_type = BlockType::Compute;
  uint16_t version = kRcbVersion;
  std::vector<uint32_t> deps;  // producer RCB ids, distinct
  std::vector<Operation> ops;

  bool operator==(const Rcb&) const = default;
};

/// One invariant violation found by validate_rcb. op_index is -1 for
/// block-level problems (header fields, dependency list).
struct Violation {
  int op_index;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  std::string to_string() const;
};

ValidationReport validate_rcb(const Rcb& rcb);

/// Serializes a validated block. Throws ValidationError without emitting
/// anything if the block fails validate_rcb.
std::vector<uint8_t> encode_rcb(const Rcb& rcb);

/// Parses a complete encoded block. The buffer must contain exactly one
/// block: trailing bytes beyond the declared payload are a FormatError.
Rcb decode_rcb(std::span<const uint8_t> buf);

/// Encoded size of a single operation record, including opcode and flags.
size_t encoded_op_size(const Operation& op);

}  // namespace tilert
