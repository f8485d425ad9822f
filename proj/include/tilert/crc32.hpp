// SPDX-FileCopyrightText: (c) 2026 tilert contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

namespace tilert {

// CRC-32 as used for frame integrity: polynomial 0x04C11DB7 in the reflected
// (LSB-first) form 0xEDB88320, init 0xFFFFFFFF, final xor 0xFFFFFFFF.
// crc32("123456789") == 0xCBF43926.

namespace detail {

constexpr std::array<uint32_t, 256> make_crc32_table() {
  std::array<uint32_t, 256> table{};
  for (uint32_t i = 0; i < 256; ++i) {
    uint32_t c = i;
    for (int k = 0; k < 8; ++k) c = (c & 1) ? (0xEDB88320u ^ (c >> 1)) : (c >> 1);
    table[i] = c;
  }
  return table;
}

inline constexpr auto kCrc32Table = make_crc32_table();

}  // namespace detail

constexpr uint32_t crc32_update(uint32_t crc, const uint8_t* data, size_t len) {
  for (size_t i = 0; i < len; ++i)
    crc = detail::kCrc32Table[(crc ^ data[i]) & 0xFF] ^ (crc >> 8);
  return crc;
}

constexpr uint32_t crc32(const uint8_t* data, size_t len) {
  return crc32_update(0xFFFFFFFFu, data, len) ^ 0xFFFFFFFFu;
}

inline uint32_t crc32(std::span<const uint8_t> data) {
  return crc32(data.data(), data.size());
}

/// Incremental interface for checksumming a frame in pieces.
class Crc32 {
 public:
  void update(const uint8_t* data, size_t len) { state_ = crc32_update(state_, data, len); }
  void update(std::span<const uint8_t> data) { update(data.data(), data.size()); }
  uint32_t value() const { return state_ ^ 0xFFFFFFFFu; }

 private:
  uint32_t state_ = 0xFFFFFFFFu;
};

static_assert(crc32(nullptr, 0) == 0x00000000u);

}  // namespace tilert
