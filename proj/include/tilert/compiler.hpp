// SPDX-FileCopyrightText: (c) 2026 tilert contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tilert/graph.hpp"
#include "tilert/model.hpp"
#include "tilert/rcb.hpp"

namespace tilert {

// Offline lowering: one COMPUTE RCB per node, in topological order. Each
// block configures its tile (KERNEL_ID, PARAMs), stages inputs with
// TO_DEVICE DMA (symbolic source, tile-relative destination into the shared
// tile-buffer layout), launches and synchronizes, then drains the output
// with FROM_DEVICE DMA. Weight tensors keep their rimfs file ids; runtime
// tensors (graph inputs and node outputs) are numbered from
// kFirstRuntimeTensorId so the two ranges never collide.

inline constexpr uint32_t kFirstRuntimeTensorId = 0x0100'0000;

struct LowerOptions {
  // Emit CACHE_FLUSH before each TO_DEVICE DMA whose source the host wrote
  // (graph inputs). Required when the runtime cache model is
  // STALE_UNTIL_FLUSH; a no-op otherwise.
  bool emit_cache_flush = false;
  // Synchronize on the completion event instead of polling STATUS.DONE.
  bool use_events = false;
  uint32_t poll_timeout_us = 1'000'000;
};

struct LoweredGraph {
  std::vector<Rcb> rcbs;  // pipeline order
  ModelManifest manifest;
  std::vector<PlacementEntry> placement;
  // rimfs file id -> expected payload bytes, in image layout order.
  std::vector<std::pair<uint32_t, uint32_t>> weight_sizes;
};

/// `grid` must be the grid the placement was computed against (the
/// completion-event id convention folds the tile index, row*cols+col).
LoweredGraph lower(const GraphIr& g, const std::map<int, TilePlacement>& placement,
                   const GridConfig& grid, const LowerOptions& options = {});

/// Assembles the deployable artifact: encodes the blocks, builds the weight
/// image from the provided payloads, and validates sizes against the
/// manifest. Throws PackError on a missing or mis-sized weight payload.
CompiledModel pack(const LoweredGraph& lowered,
                   const std::map<uint32_t, std::vector<uint8_t>>& weight_payloads);

/// parse → place → lower → pack, the full offline path.
CompiledModel compile_graph(const std::string& graph_text,
                            const std::map<uint32_t, std::vector<uint8_t>>& weight_payloads,
                            const GridConfig& grid = {}, const LowerOptions& options = {});

}  // namespace tilert
