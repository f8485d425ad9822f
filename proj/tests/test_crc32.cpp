// SPDX-FileCopyrightText: (c) 2026 tilert contributors
// SPDX-License-Identifier: Apache-2.0

#include "tilert/crc32.hpp"

#include <random>
#include <string_view>

#include "doctest.h"
#include "oracles.hpp"

using namespace tilert;

TEST_SUITE_BEGIN("crc32");

TEST_CASE("standard check value") {
  // The canonical test vector for this polynomial/reflection/xorout combo.
  const std::string_view s = "123456789";
  CHECK(crc32(reinterpret_cast<const uint8_t*>(s.data()), s.size()) == 0xCBF43926u);
}

TEST_CASE("empty input") {
  CHECK(crc32(nullptr, 0) == 0x00000000u);
}

TEST_CASE("frozen single-byte vectors") {
  // Hand-computed with the bitwise definition.
  const uint8_t zero = 0x00, ff = 0xFF, a = 'a';
  CHECK(crc32(&zero, 1) == oracle::crc32_bitwise(&zero, 1));
  CHECK(crc32(&ff, 1) == oracle::crc32_bitwise(&ff, 1));
  CHECK(crc32(&a, 1) == 0xE8B7BE43u);
}

TEST_CASE("table-driven agrees with the bitwise definition on random inputs") {
  std::mt19937 rng(0xC3C32u);
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<uint8_t> buf(rng() % 64);
    for (auto& b : buf) b = static_cast<uint8_t>(rng());
    CAPTURE(trial);
    REQUIRE(crc32(buf) == oracle::crc32_bitwise(buf.data(), buf.size()));
  }
}

TEST_CASE("incremental updates equal one-shot") {
  std::mt19937 rng(7);
  std::vector<uint8_t> buf(1024);
  for (auto& b : buf) b = static_cast<uint8_t>(rng());

  Crc32 inc;
  size_t pos = 0;
  while (pos < buf.size()) {
    const size_t chunk = std::min<size_t>(1 + rng() % 100, buf.size() - pos);
    inc.update(std::span<const uint8_t>(buf).subspan(pos, chunk));
    pos += chunk;
  }
  CHECK(inc.value() == crc32(buf));
}

TEST_CASE("appending the checksum yields the residue") {
  // For this CRC family, crc(data ++ le32(crc(data))) is the constant
  // residue 0x2144DF1C — a quick self-check of reflection and xorout.
  std::vector<uint8_t> buf{0xDE, 0xAD, 0xBE, 0xEF, 0x42};
  const uint32_t c = crc32(buf);
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<uint8_t>(c >> (8 * i)));
  CHECK(crc32(buf) == 0x2144DF1Cu);
}

TEST_CASE("single-bit damage always changes the checksum") {
  std::mt19937 rng(11);
  std::vector<uint8_t> buf(256);
  for (auto& b : buf) b = static_cast<uint8_t>(rng());
  const uint32_t clean = crc32(buf);
  for (size_t byte = 0; byte < buf.size(); ++byte)
    for (int bit = 0; bit < 8; ++bit) {
      buf[byte] ^= static_cast<uint8_t>(1u << bit);
      REQUIRE(crc32(buf) != clean);
      buf[byte] ^= static_cast<uint8_t>(1u << bit);
    }
}

TEST_SUITE_END();
