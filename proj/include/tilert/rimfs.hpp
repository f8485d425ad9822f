// SPDX-FileCopyrightText: (c) 2026 tilert contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tilert/errors.hpp"

namespace tilert {

// Read-only flat-memory file system. An image is built offline, placed into
// device-visible memory, and mounted by indexing its table; lookups return
// addresses into the image (zero-copy — suitable directly as DMA sources).
//
// Image layout (little-endian): header 16 bytes {magic u32 = 0x53464D52
// ("RMFS"), version u16 = 1, reserved u16, file_count u32, alignment u32};
// file_count entries of 12 bytes {file_id u32, offset u32, size u32};
// header+table padded to alignment; each payload padded to alignment.

inline constexpr uint32_t kRimfsMagic = 0x53464D52;  // "RMFS"
inline constexpr uint16_t kRimfsVersion = 1;
inline constexpr uint32_t kRimfsDefaultAlign = 64;

struct RimfsEntry {
  uint32_t file_id = 0;
  uint32_t offset = 0;  // bytes from image start; multiple of the alignment
  uint32_t size = 0;
};

using FilePayload = std::pair<uint32_t, std::vector<uint8_t>>;

/// Serializes (file_id, payload) pairs into an image. Entries are laid out
/// in argument order. Duplicate IDs throw BuildError.
std::vector<uint8_t> build_image(const std::vector<FilePayload>& files,
                                 uint32_t alignment = kRimfsDefaultAlign);

/// Count of payload bytes copied by rimfs internals since process start.
/// Mount and lookup must leave it unchanged; only read_payload moves bytes.
uint64_t rimfs_bytes_copied();

class RimfsImage {
 public:
  struct Handle {
    uint64_t address = 0;  // absolute: image base + entry offset
    uint32_t size = 0;
  };

  /// Indexes the table of an image at `base`. Validates the header and every
  /// entry against the buffer size without touching payload bytes.
  static RimfsImage mount(std::span<const uint8_t> buf, uint64_t base);

  Handle lookup(uint32_t file_id) const;  // throws NotFound
  bool contains(uint32_t file_id) const { return table_.count(file_id) != 0; }

  /// Copies a file's payload out of the mounted buffer (debug/host path;
  /// counted by rimfs_bytes_copied — the runtime itself never calls this).
  std::vector<uint8_t> read_payload(uint32_t file_id) const;

  uint64_t base() const { return base_; }
  uint32_t alignment() const { return alignment_; }
  size_t file_count() const { return entries_.size(); }
  const std::vector<RimfsEntry>& entries() const { return entries_; }

 private:
  uint64_t base_ = 0;
  uint32_t alignment_ = kRimfsDefaultAlign;
  std::span<const uint8_t> buf_;
  std::vector<RimfsEntry> entries_;
  std::unordered_map<uint32_t, size_t> table_;  // file_id -> entries_ index
};

// ---- runtime buffer arena ----

enum class Stage : uint8_t { Free, Receive, Compute, Send };

const char* stage_name(Stage s);

struct Region {
  uint64_t address = 0;
  uint32_t size = 0;
  uint32_t alignment = 0;
  Stage stage = Stage::Free;
  uint32_t id = 0;  // arena-assigned, for diagnostics
};

/// First-fit free-list allocator over one contiguous span of device memory.
/// Regions carry the receive/compute/send ownership stage; stages advance
/// only around the FREE→RECEIVE→COMPUTE→SEND→FREE cycle.
class Arena {
 public:
  Arena(uint64_t base, uint64_t size);

  Region alloc(uint32_t size, uint32_t alignment);  // throws OutOfMemory
  /// Advances to `to`, which must be the successor of the current stage.
  void advance(Region& region, Stage to);  // throws StageError
  void release(Region& region);            // throws StageError on double release

  uint64_t base() const { return base_; }
  uint64_t size() const { return size_; }
  uint64_t live_bytes() const { return live_bytes_; }
  size_t live_regions() const { return live_.size(); }

 private:
  struct FreeBlock {
    uint64_t addr;
    uint64_t size;
  };

  void insert_free(uint64_t addr, uint64_t size);

  uint64_t base_;
  uint64_t size_;
  uint64_t live_bytes_ = 0;
  uint32_t next_id_ = 1;
  std::vector<FreeBlock> free_;                   // addr-sorted, coalesced
  std::unordered_map<uint64_t, uint32_t> live_;   // addr -> size
};

}  // namespace tilert
