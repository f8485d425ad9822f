// SPDX-FileCopyrightText: (c) 2026 tilert contributors
// SPDX-License-Identifier: Apache-2.0

#include "tilert/frame.hpp"

#include <random>

#include "doctest.h"
#include "oracles.hpp"

using namespace tilert;

TEST_SUITE_BEGIN("frame");

TEST_CASE("frozen ACK frame: 16 bytes, magic first, CRC last") {
  const std::vector<uint8_t> want = {
      0x41, 0x45, 0x47, 0x31,  // "AEG1"
      0x07, 0x00,              // ACK
      0x00, 0x00,              // flags
      0x00, 0x00, 0x00, 0x00,  // empty payload
      0x70, 0xD6, 0xE7, 0x6F,  // CRC-32 of the 8 header bytes after the magic
  };
  CHECK(encode_frame(make_ack()) == want);
  CHECK(decode_frame(want) == make_ack());
}

TEST_CASE("frozen NACK frame carries the code as one LE u32") {
  const std::vector<uint8_t> want = {0x41, 0x45, 0x47, 0x31, 0x08, 0x00, 0x00,
                                     0x00, 0x04, 0x00, 0x00, 0x00, 0x02, 0x00,
                                     0x00, 0x00, 0xE0, 0x76, 0x9A, 0x53};
  CHECK(encode_frame(make_nack(NackCode::Integrity)) == want);
  const Frame f = decode_frame(want);
  CHECK(f.type == MsgType::Nack);
  CHECK(f.payload == std::vector<uint8_t>{0x02, 0x00, 0x00, 0x00});
}

TEST_CASE("the frame CRC matches an independent implementation") {
  Frame f;
  f.type = MsgType::Run;
  f.flags = 0x1234;
  f.payload = {1, 2, 3, 4, 5};
  const auto buf = encode_frame(f);
  REQUIRE(buf.size() == 12 + 5 + 4);
  const uint32_t stored = static_cast<uint32_t>(buf[buf.size() - 4]) |
                          (static_cast<uint32_t>(buf[buf.size() - 3]) << 8) |
                          (static_cast<uint32_t>(buf[buf.size() - 2]) << 16) |
                          (static_cast<uint32_t>(buf[buf.size() - 1]) << 24);
  CHECK(stored == oracle::crc32_bitwise(buf.data() + 4, buf.size() - 8));
}

TEST_CASE("encode/decode round-trips generated frames") {
  std::mt19937 rng(0xF4A);
  for (int trial = 0; trial < 1500; ++trial) {
    CAPTURE(trial);
    Frame f;
    f.type = static_cast<MsgType>(1 + rng() % 8);
    f.flags = static_cast<uint16_t>(rng());
    f.payload.resize(rng() % 300);
    for (auto& b : f.payload) b = static_cast<uint8_t>(rng());
    REQUIRE(decode_frame(encode_frame(f)) == f);
  }
}

TEST_CASE("every single-byte corruption is detected") {
  Frame f;
  f.type = MsgType::LoadPlan;
  f.flags = 0xBEEF;
  f.payload.resize(37);
  for (size_t i = 0; i < f.payload.size(); ++i) f.payload[i] = static_cast<uint8_t>(i * 7);
  const auto clean = encode_frame(f);

  for (size_t i = 0; i < clean.size(); ++i) {
    for (uint8_t flip : {uint8_t{0x01}, uint8_t{0x80}, uint8_t{0xFF}}) {
      CAPTURE(i);
      CAPTURE(flip);
      auto bad = clean;
      bad[i] ^= flip;
      CHECK_THROWS_AS(decode_frame(bad), Error);
    }
  }
}

TEST_CASE("corruption maps to the right failure class") {
  const auto clean = encode_frame(Frame{MsgType::Run, 0, {9, 9, 9}});

  auto bad = clean;
  bad[0] ^= 0xFF;  // magic
  CHECK_THROWS_AS(decode_frame(bad), FrameError);

  bad = clean;
  bad[4] = 0;  // type 0: outside 1..8
  CHECK_THROWS_AS(decode_frame(bad), FrameError);

  bad = clean;
  bad[4] = 200;
  CHECK_THROWS_AS(decode_frame(bad), FrameError);

  bad = clean;
  bad[12] ^= 0x10;  // payload body
  CHECK_THROWS_AS(decode_frame(bad), IntegrityError);

  bad = clean;
  bad.back() ^= 0x01;  // stored CRC itself
  CHECK_THROWS_AS(decode_frame(bad), IntegrityError);

  // A type flip that lands on another valid type is caught by the CRC.
  bad = clean;
  bad[4] = static_cast<uint8_t>(MsgType::Result);
  CHECK_THROWS_AS(decode_frame(bad), IntegrityError);
}

TEST_CASE("length violations") {
  // Declared length over the cap, caught before any payload is trusted.
  std::vector<uint8_t> huge = {0x41, 0x45, 0x47, 0x31, 0x07, 0x00, 0x00, 0x00,
                               0x01, 0x00, 0x00, 0x01,  // 16 MiB + 1
                               0x00, 0x00, 0x00, 0x00};
  try {
    decode_frame(huge);
    FAIL("oversized declaration accepted");
  } catch (const FrameError& e) {
    CHECK(e.kind == FrameError::Kind::TooLarge);
  }

  Frame f;
  f.payload.assign(kMaxPayload + 1, 0);
  CHECK_THROWS_AS(encode_frame(f), FrameError);
  f.payload.resize(kMaxPayload);  // exactly at the cap is legal
  CHECK(decode_frame(encode_frame(f)).payload.size() == kMaxPayload);

  // Short buffers and trailing garbage.
  CHECK_THROWS_AS(decode_frame(std::vector<uint8_t>(15, 0)), FrameError);
  auto padded = encode_frame(make_ack());
  padded.push_back(0);
  try {
    decode_frame(padded);
    FAIL("trailing byte accepted");
  } catch (const FrameError& e) {
    CHECK(e.kind == FrameError::Kind::Truncated);
  }
}

TEST_CASE("telemetry payload is exactly 36 LE bytes") {
  Telemetry t;
  t.inferences = 0x1122334455667788;
  t.stage_ticks = {1, 2, 3};
  t.last_error = 4;
  const std::vector<uint8_t> want = {0x88, 0x77, 0x66, 0x55, 0x44, 0x33, 0x22, 0x11, 0x01,
                                     0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x02, 0x00,
                                     0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x03, 0x00, 0x00,
                                     0x00, 0x00, 0x00, 0x00, 0x00, 0x04, 0x00, 0x00, 0x00};
  CHECK(encode_telemetry(t) == want);
  CHECK(decode_telemetry(want) == t);
  CHECK_THROWS_AS(decode_telemetry(std::vector<uint8_t>(35, 0)), FrameError);
  CHECK_THROWS_AS(decode_telemetry(std::vector<uint8_t>(37, 0)), FrameError);

  std::mt19937 rng(0x7E1);
  for (int trial = 0; trial < 200; ++trial) {
    Telemetry r;
    r.inferences = (uint64_t{rng()} << 32) | rng();
    for (auto& s : r.stage_ticks) s = (uint64_t{rng()} << 32) | rng();
    r.last_error = rng() % 7;
    REQUIRE(decode_telemetry(encode_telemetry(r)) == r);
  }
}

TEST_SUITE_END();
