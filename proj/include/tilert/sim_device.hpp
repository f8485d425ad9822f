// SPDX-FileCopyrightText: (c) 2026 tilert contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include "tilert/device_map.hpp"
#include "tilert/hal.hpp"

namespace tilert {

enum class CacheModel {
  Off,
  // Host writes to global memory stay invisible to DMA until flush_cache;
  // DMA writes stay invisible to host reads until invalidate_cache.
  StaleUntilFlush,
};

struct SimConfig {
  GridConfig grid;                          // default 4 x 7 = 28 tiles
  uint32_t local_mem_bytes = 65536;         // per tile
  uint64_t global_mem_bytes = 64ull << 20;  // external DRAM model
  CacheModel cache_model = CacheModel::Off;

  // Cost model (virtual ticks). A DMA costs dma_setup_cost + ceil(len /
  // dma_bytes_per_tick); a kernel costs ceil(out_elems /
  // kernel_elems_per_tick); each poll sample costs 1. Register access is
  // free. dma_setup_cost is the knob the benchmark raises to model an
  // OS-mediated control path (fixed per-transfer crossing penalty).
  uint32_t dma_setup_cost = 100;
  uint32_t dma_bytes_per_tick = 64;
  uint32_t kernel_elems_per_tick = 64;

  bool operator==(const SimConfig&) const = default;
};

/// Byte extents of one kernel invocation's tile-local buffers: inputs in
/// port order, then the output, each 64-byte aligned starting at offset 0.
/// Shared contract between the simulator's kernels and the graph compiler's
/// lowering — both sides compute it from (kernel, params) alone.
struct TileBuffer {
  uint32_t offset = 0;
  uint32_t size = 0;
};

struct KernelLayout {
  std::vector<TileBuffer> inputs;
  TileBuffer output;
  uint32_t end = 0;        // first byte past the layout
  uint32_t out_elems = 0;  // output element count, drives the cost model
};

/// Throws RangeError on an unknown kernel id or malformed params.
KernelLayout kernel_layout(KernelId kernel, std::span<const uint32_t> params);

/// Number of PARAM registers a kernel consumes.
int kernel_param_count(KernelId kernel);

/// Register-mapped tile-array simulator. Fully synchronous: kernels run to
/// completion inside the CTRL.START write, DMA copies inside initiate_dma;
/// the virtual clock advances per the cost model, so identical op sequences
/// always land on identical final clock values.
class SimDevice final : public HalDriver, public EventSource, public HostMemory {
 public:
  explicit SimDevice(const SimConfig& cfg = {});

  // HalDriver primitives.
  void write32(uint64_t addr, uint32_t value) override;
  uint32_t read32(uint64_t addr) override;
  void write_block(uint64_t addr, const uint8_t* data, size_t len) override;
  DmaHandle initiate_dma(const DmaRequest& req) override;
  void wait_dma(DmaHandle handle) override;
  bool poll_register_masked(uint64_t addr, uint32_t mask, uint32_t expected,
                            uint32_t timeout_us) override;
  void flush_cache(uint64_t addr, size_t len) override;
  void invalidate_cache(uint64_t addr, size_t len) override;
  uint64_t ticks() const override { return clock_; }

  // HostMemory. Under StaleUntilFlush these touch the host's view only,
  // which is what makes missing flushes observable.
  void host_write(uint64_t addr, std::span<const uint8_t> data) override;
  void host_read(uint64_t addr, std::span<uint8_t> out) const override;

  /// EventSource: pops the oldest completion event; false when none pending.
  bool pop_event(CompletionEvent& out) override;
  size_t pending_events() const { return events_.size(); }

  const SimConfig& config() const { return cfg_; }
  uint64_t global_base() const { return kGlobalBase; }
  uint64_t global_size() const { return cfg_.global_mem_bytes; }

  /// Direct read of a tile's local memory (test instrumentation).
  std::span<const uint8_t> tile_local(uint16_t col, uint16_t row) const;

 private:
  struct Tile {
    uint32_t ctrl = 0;
    uint32_t status = 0;
    uint32_t kernel_id = 0;
    std::array<uint32_t, kNumParams> params{};
    std::vector<uint8_t> local;
  };

  Tile& tile_at(uint16_t col, uint16_t row);
  const Tile* find_tile(uint64_t addr, uint64_t* offset_out) const;
  void launch(Tile& t, uint32_t tile_index);

  // Resolves a [addr, addr+len) range to storage. Global ranges return the
  // requested view (DMA-visible vs host) under the cache model.
  std::span<uint8_t> global_range(uint64_t addr, size_t len, bool dma_view);
  std::span<const uint8_t> global_range(uint64_t addr, size_t len, bool dma_view) const;
  std::span<uint8_t> local_range(uint64_t addr, size_t len);
  bool in_global(uint64_t addr, size_t len) const;
  bool in_one_tile_local(uint64_t addr, size_t len) const;

  SimConfig cfg_;
  std::vector<Tile> tiles_;
  std::vector<uint8_t> global_;       // DMA-visible DRAM contents
  std::vector<uint8_t> host_view_;    // host's cached view (StaleUntilFlush only)
  std::deque<CompletionEvent> events_;
  std::vector<DmaHandle> outstanding_;  // issued, not yet waited (depth 1/tile keeps this tiny)
  DmaHandle next_handle_ = 1;
  uint64_t clock_ = 0;
};

}  // namespace tilert
