// SPDX-FileCopyrightText: (c) 2026 tilert contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tilert/model.hpp"
#include "tilert/sim_device.hpp"

namespace tilert {

// Benchmarks over the virtual clock. The simulator's cost model is
// data-independent and the runtime binds every run to the same addresses,
// so repeated inferences are tick-for-tick reproducible: a nonzero latency
// CV is a determinism bug, not noise.

struct LatencyStats {
  size_t count = 0;   // post-warmup samples
  double mean = 0.0;
  double stddev = 0.0;  // population
  double cv = 0.0;      // stddev / mean, 0 when mean is 0
  uint64_t p50 = 0;     // nearest-rank percentiles
  uint64_t p99 = 0;
  uint64_t max = 0;
};

/// Drops the first `warmup` samples. Throws StatsError when nothing remains.
LatencyStats compute_stats(std::span<const uint64_t> samples, size_t warmup = 0);

struct KernelBenchReport {
  size_t iterations = 0;
  size_t warmup = 0;
  LatencyStats end_to_end;                 // virtual ticks per inference
  std::array<LatencyStats, 3> stages;      // kStageInput/Compute/Output
  bool traces_identical = false;           // post-warmup traces bitwise equal

  std::string to_text() const;
  std::string to_csv() const;
};

/// Loads `model` into a fresh session and runs `iterations` inferences over
/// a fixed seeded input, sampling per-stage and end-to-end virtual ticks.
KernelBenchReport run_kernel_bench(const CompiledModel& model, size_t iterations,
                                   size_t warmup = 0, const SimConfig& cfg = {});

// Transfer sweep: moves a fixed volume host->tile in fixed-size blocks and
// compares a direct doorbell path against an OS-mediated one, modeled as a
// raised per-transfer setup cost (dma_setup_cost + mediation_penalty). The
// per-size speedup follows
//
//   speedup(s) = (c_d + p + ceil(s/B)) / (c_d + ceil(s/B))
//
// with c_d = dma_setup_cost, p = mediation_penalty, B = dma_bytes_per_tick:
// the fixed crossing cost amortizes as blocks grow, so speedup decays
// toward 1 monotonically in s.

struct SweepRow {
  uint32_t block_size = 0;
  size_t transfers = 0;        // ceil(volume / block_size)
  uint64_t direct_ticks = 0;   // measured on the virtual clock
  uint64_t mediated_ticks = 0;
  double measured_speedup = 0.0;   // mediated / direct
  double predicted_speedup = 0.0;  // closed form above
};

struct TransferSweepReport {
  std::vector<SweepRow> rows;  // one per block size, input order
  uint64_t volume = 0;
  uint32_t dma_setup_cost = 0;
  uint32_t mediation_penalty = 0;
  uint32_t dma_bytes_per_tick = 0;

  std::string to_text() const;
  std::string to_csv() const;
};

/// Throws BenchError on an empty size list, a zero size, a zero volume, or
/// a block size exceeding tile-local memory.
TransferSweepReport run_transfer_sweep(const std::vector<uint32_t>& block_sizes,
                                       uint64_t volume, uint32_t mediation_penalty = 600,
                                       const SimConfig& cfg = {});

}  // namespace tilert
