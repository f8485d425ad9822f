// SPDX-FileCopyrightText: (c) 2026 tilert contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>

namespace tilert {

// Device address map. Two windows exist: the tile-array region and global
// (external DRAM) memory. Address 0x0 is deliberately unmapped so null-ish
// accesses fault instead of aliasing a register.
//
//   tile base = kTileRegionBase + (row*cols + col) * kTileStride
//   +0x0000 .. +0x0FFF   tile register file
//   +0x1000 .. +0x1000+local_mem_bytes  tile local memory
//
// Global memory starts at kGlobalBase.

inline constexpr uint64_t kTileRegionBase = 0x1000'0000;
inline constexpr uint64_t kTileStride = 0x2'0000;
inline constexpr uint64_t kTileLocalMemOffset = 0x1000;
inline constexpr uint64_t kGlobalBase = 0x4000'0000;

// Tile register offsets (byte offsets from the tile base).
inline constexpr uint32_t kRegCtrl = 0x00;
inline constexpr uint32_t kRegStatus = 0x04;
inline constexpr uint32_t kRegKernelId = 0x08;
inline constexpr uint32_t kRegParam0 = 0x10;  // PARAM0..PARAM7 at +0x10..+0x2C
inline constexpr int kNumParams = 8;

inline constexpr uint32_t reg_param(int i) { return kRegParam0 + 4u * static_cast<uint32_t>(i); }

// CTRL bits. START self-clears when the launch is accepted.
inline constexpr uint32_t kCtrlStart = 1u << 0;

// STATUS bits. DONE is set only by kernel completion; ERROR on a bad launch.
inline constexpr uint32_t kStatusDone = 1u << 0;
inline constexpr uint32_t kStatusError = 1u << 1;

// Kernel IDs understood by the tile compute model.
enum class KernelId : uint32_t {
  Passthrough = 1,
  MatmulI8 = 2,
  Conv2dF32 = 3,
  ReluF32 = 4,
  SoftmaxF32 = 5,
};

const char* kernel_name(KernelId id);

struct GridConfig {
  uint16_t cols = 4;
  uint16_t rows = 7;
  uint32_t tiles() const { return static_cast<uint32_t>(cols) * rows; }
  bool operator==(const GridConfig&) const = default;
};

/// Absolute base address of tile (col,row) under the given grid.
inline constexpr uint64_t tile_base(uint16_t col, uint16_t row, uint16_t cols) {
  return kTileRegionBase + (static_cast<uint64_t>(row) * cols + col) * kTileStride;
}

}  // namespace tilert
