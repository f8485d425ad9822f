// SPDX-FileCopyrightText: (c) 2026 tilert contributors
// SPDX-License-Identifier: Apache-2.0

#include "tilert/rcb.hpp"

#include <algorithm>
#include <cstdio>
#include <unordered_set>

#include "tilert/bytes.hpp"

namespace tilert {

namespace {

constexpr size_t kAddrRefSize = 12;

void write_addr_ref(ByteWriter& w, const AddrRef& ref) {
  w.u8(static_cast<uint8_t>(ref.kind));
  w.u8(0);
  switch (ref.kind) {
    case AddrKind::Absolute:
      w.u64(ref.addr);
      w.u16(0);
      break;
    case AddrKind::RelativeTile:
      w.u16(ref.col);
      w.u16(ref.row);
      w.u32(ref.tile_offset);
      w.u16(0);
      break;
    case AddrKind::Symbolic:
      w.u32(ref.buffer_id);
      w.u32(ref.offset);
      w.u16(0);
      break;
  }
}

AddrRef read_addr_ref(ByteReader& r) {
  const size_t at = r.offset();
  const uint8_t kind = r.u8();
  r.skip(1);
  AddrRef ref;
  switch (kind) {
    case 0:
      ref.kind = AddrKind::Absolute;
      ref.addr = r.u64();
      r.skip(2);
      break;
    case 1:
      ref.kind = AddrKind::RelativeTile;
      ref.col = r.u16();
      ref.row = r.u16();
      ref.tile_offset = r.u32();
      r.skip(2);
      break;
    case 2:
      ref.kind = AddrKind::Symbolic;
      ref.buffer_id = r.u32();
      ref.offset = r.u32();
      r.skip(2);
      break;
    default:
      throw FormatError(FormatError::Kind::AddrKind, at,
                        "unknown AddrRef kind " + std::to_string(kind));
  }
  return ref;
}

void write_op(ByteWriter& w, const Operation& op) {
  w.u16(static_cast<uint16_t>(op.opcode()));
  w.u16(op.flags);
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, RegWriteOp>) {
          write_addr_ref(w, p.addr);
          w.u32(p.value);
        } else if constexpr (std::is_same_v<T, RegReadOp>) {
          write_addr_ref(w, p.addr);
          w.u32(p.capture_slot);
        } else if constexpr (std::is_same_v<T, WriteBlockOp>) {
          write_addr_ref(w, p.addr);
          w.u32(static_cast<uint32_t>(p.data.size()));
          w.bytes(p.data.data(), p.data.size());
          w.pad_to(4);
        } else if constexpr (std::is_same_v<T, DmaTriggerOp>) {
          w.u8(static_cast<uint8_t>(p.direction));
          w.u8(0);
          w.u16(0);
          write_addr_ref(w, p.src);
          write_addr_ref(w, p.dst);
          w.u32(p.length);
        } else if constexpr (std::is_same_v<T, PollMaskOp>) {
          write_addr_ref(w, p.addr);
          w.u32(p.mask);
          w.u32(p.expected);
          w.u32(p.timeout_us);
        } else if constexpr (std::is_same_v<T, CacheFlushOp>) {
          write_addr_ref(w, p.addr);
          w.u32(p.length);
        } else if constexpr (std::is_same_v<T, CacheInvalidateOp>) {
          write_addr_ref(w, p.addr);
          w.u32(p.length);
        } else if constexpr (std::is_same_v<T, WaitEventOp>) {
          w.u32(p.event_id);
          w.u32(0);
        }
      },
      op.payload);
}

Operation read_op(ByteReader& r) {
  const size_t at = r.offset();
  const uint16_t code = r.u16();
  Operation op;
  op.flags = r.u16();
  switch (code) {
    case static_cast<uint16_t>(OpCode::RegWrite): {
      RegWriteOp p;
      p.addr = read_addr_ref(r);
      p.value = r.u32();
      op.payload = p;
      break;
    }
    case static_cast<uint16_t>(OpCode::RegRead): {
      RegReadOp p;
      p.addr = read_addr_ref(r);
      p.capture_slot = r.u32();
      op.payload = p;
      break;
    }
    case static_cast<uint16_t>(OpCode::WriteBlock): {
      WriteBlockOp p;
      p.addr = read_addr_ref(r);
      const uint32_t len = r.u32();
      auto data = r.bytes(len);
      p.data.assign(data.begin(), data.end());
      r.skip((4 - len % 4) % 4);
      op.payload = p;
      break;
    }
    case static_cast<uint16_t>(OpCode::DmaTrigger): {
      DmaTriggerOp p;
      const uint8_t dir = r.u8();
      if (dir > 1)
        throw FormatError(FormatError::Kind::Opcode, at,
                          "bad DMA direction " + std::to_string(dir));
      p.direction = static_cast<DmaDir>(dir);
      r.skip(3);
      p.src = read_addr_ref(r);
      p.dst = read_addr_ref(r);
      p.length = r.u32();
      op.payload = p;
      break;
    }
    case static_cast<uint16_t>(OpCode::PollMask): {
      PollMaskOp p;
      p.addr = read_addr_ref(r);
      p.mask = r.u32();
      p.expected = r.u32();
      p.timeout_us = r.u32();
      op.payload = p;
      break;
    }
    case static_cast<uint16_t>(OpCode::CacheFlush): {
      CacheFlushOp p;
      p.addr = read_addr_ref(r);
      p.length = r.u32();
      op.payload = p;
      break;
    }
    case static_cast<uint16_t>(OpCode::CacheInvalidate): {
      CacheInvalidateOp p;
      p.addr = read_addr_ref(r);
      p.length = r.u32();
      op.payload = p;
      break;
    }
    case static_cast<uint16_t>(OpCode::WaitEvent): {
      WaitEventOp p;
      p.event_id = r.u32();
      r.skip(4);
      op.payload = p;
      break;
    }
    default:
      throw FormatError(FormatError::Kind::Opcode, at, [code] {
        char buf[32];
        std::snprintf(buf, sizeof buf, "unknown opcode 0x%04X", code);
        return std::string(buf);
      }());
  }
  return op;
}

void check_addr_ref(const AddrRef& ref, int op_index, const char* field,
                    std::vector<Violation>& out) {
  switch (ref.kind) {
    case AddrKind::Absolute:
    case AddrKind::RelativeTile:
    case AddrKind::Symbolic:
      return;
  }
  out.push_back({op_index, std::string(field) + ": unknown AddrRef kind"});
}

}  // namespace

bool AddrRef::operator==(const AddrRef& o) const {
  if (kind != o.kind) return false;
  switch (kind) {
    case AddrKind::Absolute:
      return addr == o.addr;
    case AddrKind::RelativeTile:
      return col == o.col && row == o.row && tile_offset == o.tile_offset;
    case AddrKind::Symbolic:
      return buffer_id == o.buffer_id && offset == o.offset;
  }
  return false;
}

const char* opcode_name(OpCode op) {
  switch (op) {
    case OpCode::RegWrite: return "REG_WRITE";
    case OpCode::RegRead: return "REG_READ";
    case OpCode::WriteBlock: return "WRITE_BLOCK";
    case OpCode::DmaTrigger: return "DMA_TRIGGER";
    case OpCode::PollMask: return "POLL_MASK";
    case OpCode::CacheFlush: return "CACHE_FLUSH";
    case OpCode::CacheInvalidate: return "CACHE_INVALIDATE";
    case OpCode::WaitEvent: return "WAIT_EVENT";
  }
  return "UNKNOWN";
}

size_t encoded_op_size(const Operation& op) {
  return std::visit(
      [](const auto& p) -> size_t {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, RegWriteOp>) return 20;
        else if constexpr (std::is_same_v<T, RegReadOp>) return 20;
        else if constexpr (std::is_same_v<T, WriteBlockOp>)
          return 20 + (p.data.size() + 3) / 4 * 4;
        else if constexpr (std::is_same_v<T, DmaTriggerOp>) return 36;
        else if constexpr (std::is_same_v<T, PollMaskOp>) return 28;
        else if constexpr (std::is_same_v<T, CacheFlushOp>) return 20;
        else if constexpr (std::is_same_v<T, CacheInvalidateOp>) return 20;
        else return 12;  // WaitEventOp
      },
      op.payload);
}

ValidationReport validate_rcb(const Rcb& rcb) {
  ValidationReport report;
  auto& v = report.violations;

  if (rcb.version != kRcbVersion)
    v.push_back({-1, "version must be " + std::to_string(kRcbVersion)});
  switch (rcb.block_type) {
    case BlockType::Compute:
    case BlockType::Transfer:
      if (rcb.ops.empty())
        v.push_back({-1, "ops must be non-empty for COMPUTE and TRANSFER blocks"});
      break;
    case BlockType::Config:
      break;
    default:
      v.push_back({-1, "unknown block_type"});
  }

  std::unordered_set<uint32_t> seen;
  for (uint32_t d : rcb.deps) {
    if (!seen.insert(d).second) {
      v.push_back({-1, "deps: duplicate dependency id " + std::to_string(d)});
      break;
    }
  }

  for (size_t i = 0; i < rcb.ops.size(); ++i) {
    const int idx = static_cast<int>(i);
    std::visit(
        [&](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, RegWriteOp>) {
            check_addr_ref(p.addr, idx, "addr", v);
          } else if constexpr (std::is_same_v<T, RegReadOp>) {
            check_addr_ref(p.addr, idx, "addr", v);
          } else if constexpr (std::is_same_v<T, WriteBlockOp>) {
            check_addr_ref(p.addr, idx, "addr", v);
            if (p.data.empty())
              v.push_back({idx, "WRITE_BLOCK data length must be > 0"});
          } else if constexpr (std::is_same_v<T, DmaTriggerOp>) {
            check_addr_ref(p.src, idx, "src", v);
            check_addr_ref(p.dst, idx, "dst", v);
            if (p.length == 0) v.push_back({idx, "DMA length must be > 0"});
          } else if constexpr (std::is_same_v<T, PollMaskOp>) {
            check_addr_ref(p.addr, idx, "addr", v);
            if (p.timeout_us == 0) v.push_back({idx, "POLL timeout must be > 0"});
          } else if constexpr (std::is_same_v<T, CacheFlushOp>) {
            check_addr_ref(p.addr, idx, "addr", v);
          } else if constexpr (std::is_same_v<T, CacheInvalidateOp>) {
            check_addr_ref(p.addr, idx, "addr", v);
          }
        },
        rcb.ops[i].payload);
  }
  return report;
}

std::string ValidationReport::to_string() const {
  std::string s;
  for (const auto& viol : violations) {
    if (viol.op_index >= 0) s += "op " + std::to_string(viol.op_index) + ": ";
    s += viol.message;
    s += '\n';
  }
  return s;
}

std::vector<uint8_t> encode_rcb(const Rcb& rcb) {
  auto report = validate_rcb(rcb);
  if (!report.ok()) throw ValidationError("encode_rcb: " + report.to_string());

  size_t payload = 0;
  for (const auto& op : rcb.ops) payload += encoded_op_size(op);

  ByteWriter w;
  w.u32(kRcbMagic);
  w.u16(rcb.version);
  w.u16(static_cast<uint16_t>(rcb.block_type));
  w.u32(static_cast<uint32_t>(rcb.ops.size()));
  w.u32(static_cast<uint32_t>(payload));
  w.u16(static_cast<uint16_t>(rcb.deps.size()));
  w.u16(0);
  for (uint32_t d : rcb.deps) w.u32(d);
  for (const auto& op : rcb.ops) write_op(w, op);
  return w.take();
}

Rcb decode_rcb(std::span<const uint8_t> buf) {
  ByteReader r(buf);
  const uint32_t magic = r.u32();
  if (magic != kRcbMagic)
    throw FormatError(FormatError::Kind::Magic, 0, "bad RCB magic");
  Rcb rcb;
  rcb.version = r.u16();
  if (rcb.version != kRcbVersion)
    throw FormatError(FormatError::Kind::Version, 4,
                      "unsupported RCB version " + std::to_string(rcb.version));
  const uint16_t bt = r.u16();
  if (bt > 2)
    throw FormatError(FormatError::Kind::BlockType, 6,
                      "unknown block type " + std::to_string(bt));
  rcb.block_type = static_cast<BlockType>(bt);
  const uint32_t op_count = r.u32();
  const uint32_t payload_size = r.u32();
  const uint16_t dep_count = r.u16();
  r.skip(2);

  rcb.deps.reserve(dep_count);
  for (uint16_t i = 0; i < dep_count; ++i) rcb.deps.push_back(r.u32());

  const size_t ops_start = r.offset();
  rcb.ops.reserve(op_count);
  for (uint32_t i = 0; i < op_count; ++i) rcb.ops.push_back(read_op(r));

  const size_t consumed = r.offset() - ops_start;
  if (consumed != payload_size)
    throw FormatError(FormatError::Kind::Truncated, ops_start,
                      "payload_size mismatch: declared " + std::to_string(payload_size) +
                          ", consumed " + std::to_string(consumed));
  if (r.remaining() != 0)
    throw FormatError(FormatError::Kind::Trailing, r.offset(),
                      std::to_string(r.remaining()) + " trailing bytes after block");
  return rcb;
}

}  // namespace tilert
