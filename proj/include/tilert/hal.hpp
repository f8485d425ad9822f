// SPDX-FileCopyrightText: (c) 2026 tilert contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "tilert/errors.hpp"

namespace tilert {

enum class DmaDir : uint8_t {
  ToDevice = 0,
  FromDevice = 1,
};

/// A fully resolved DMA request. Both endpoints are absolute device
/// addresses; each range must lie entirely within global memory or within
/// one tile's local memory.
struct DmaRequest {
  DmaDir direction = DmaDir::ToDevice;
  uint64_t src = 0;
  uint64_t dst = 0;
  uint32_t length = 0;  // bytes, > 0
};

using DmaHandle = uint64_t;

/// A completion notification raised by the device (ISR analogue).
struct CompletionEvent {
  uint32_t event_id = 0;  // tile index + 1, so 0 never names a tile
  uint16_t col = 0;
  uint16_t row = 0;
  bool operator==(const CompletionEvent&) const = default;
};

/// Single-consumer view of the device's completion-event queue.
class EventSource {
 public:
  virtual ~EventSource() = default;
  virtual bool pop_event(CompletionEvent& out) = 0;
};

/// Host-CPU access to global (system) memory. Not part of the eight HAL
/// primitives: the host owns DRAM directly; a cache model may make this view
/// diverge from what DMA sees until flush/invalidate.
class HostMemory {
 public:
  virtual ~HostMemory() = default;
  virtual void host_write(uint64_t addr, std::span<const uint8_t> data) = 0;
  virtual void host_read(uint64_t addr, std::span<uint8_t> out) const = 0;
};

/// The hardware abstraction every backend implements: eight primitives.
/// Implementations must be total over their declared address map — an access
/// outside it throws AddressFault, never succeeds silently.
class HalDriver {
 public:
  virtual ~HalDriver() = default;

  virtual void write32(uint64_t addr, uint32_t value) = 0;
  virtual uint32_t read32(uint64_t addr) = 0;
  virtual void write_block(uint64_t addr, const uint8_t* data, size_t len) = 0;

  virtual DmaHandle initiate_dma(const DmaRequest& req) = 0;
  virtual void wait_dma(DmaHandle handle) = 0;

  /// Samples addr until (value & mask) == expected or timeout_us elapses on
  /// the backend's clock. Returns false on timeout.
  virtual bool poll_register_masked(uint64_t addr, uint32_t mask, uint32_t expected,
                                    uint32_t timeout_us) = 0;

  virtual void flush_cache(uint64_t addr, size_t len) = 0;
  virtual void invalidate_cache(uint64_t addr, size_t len) = 0;

  /// Monotonic backend clock, used for trace timestamps and stage timing.
  /// Not one of the eight primitives — instrumentation only; a backend with
  /// no notion of time may leave it at zero.
  virtual uint64_t ticks() const { return 0; }
};

}  // namespace tilert
