// SPDX-FileCopyrightText: (c) 2026 tilert contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <vector>

#include "tilert/errors.hpp"

namespace tilert {

// Little-endian byte stream helpers shared by the rcb, rimfs and frame codecs.

class ByteWriter {
 public:
  void u8(uint8_t v) { buf_.push_back(v); }

  void u16(uint16_t v) {
    buf_.push_back(static_cast<uint8_t>(v));
    buf_.push_back(static_cast<uint8_t>(v >> 8));
  }

  void u32(uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }

  void u64(uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<uint8_t>(v >> (8 * i)));
  }

  void bytes(std::span<const uint8_t> data) { buf_.insert(buf_.end(), data.begin(), data.end()); }
  void bytes(const uint8_t* data, size_t len) { buf_.insert(buf_.end(), data, data + len); }

  void pad_to(size_t alignment) {
    while (buf_.size() % alignment != 0) buf_.push_back(0);
  }

  size_t size() const { return buf_.size(); }

  std::vector<uint8_t> take() { return std::move(buf_); }

 private:
  std::vector<uint8_t> buf_;
};

/// Bounds-checked little-endian reader. Throws the supplied exception factory's
/// error when the buffer runs short, so each codec reports its own error type.
class ByteReader {
 public:
  explicit ByteReader(std::span<const uint8_t> buf) : buf_(buf) {}

  size_t offset() const { return pos_; }
  size_t remaining() const { return buf_.size() - pos_; }

  uint8_t u8() {
    need(1);
    return buf_[pos_++];
  }

  uint16_t u16() {
    need(2);
    uint16_t v = static_cast<uint16_t>(buf_[pos_] | (buf_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }

  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(buf_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }

  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(buf_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }

  std::vector<uint8_t> bytes(size_t n) {
    need(n);
    std::vector<uint8_t> out(buf_.begin() + pos_, buf_.begin() + pos_ + n);
    pos_ += n;
    return out;
  }

  void skip(size_t n) {
    need(n);
    pos_ += n;
  }

 private:
  void need(size_t n) const {
    if (buf_.size() - pos_ < n)
      throw FormatError(FormatError::Kind::Truncated, pos_,
                        "buffer truncated at offset " + std::to_string(pos_));
  }

  std::span<const uint8_t> buf_;
  size_t pos_ = 0;
};

inline uint32_t load_u32_le(const uint8_t* p) {
  uint32_t v;
  std::memcpy(&v, p, 4);  // host is little-endian on every supported target
  return v;
}

inline void store_u32_le(uint8_t* p, uint32_t v) { std::memcpy(p, &v, 4); }

}  // namespace tilert
