// SPDX-FileCopyrightText: (c) 2026 tilert contributors
// SPDX-License-Identifier: Apache-2.0

#include "tilert/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "tilert/runtime.hpp"

namespace tilert {

namespace {

uint64_t nearest_rank(const std::vector<uint64_t>& sorted, int percentile) {
  // ceil(p/100 * n) in integer arithmetic; rank is 1-based.
  const size_t rank = (sorted.size() * percentile + 99) / 100;
  return sorted[rank == 0 ? 0 : rank - 1];
}

std::string fmt_line(const char* name, const LatencyStats& s) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "  %-8s %12.1f %12.3f %8.5f %10llu %10llu %10llu\n", name,
                s.mean, s.stddev, s.cv, static_cast<unsigned long long>(s.p50),
                static_cast<unsigned long long>(s.p99), static_cast<unsigned long long>(s.max));
  return buf;
}

std::string csv_line(const char* name, const LatencyStats& s) {
  char buf[200];
  std::snprintf(buf, sizeof(buf), "%s,%zu,%.6f,%.6f,%.6f,%llu,%llu,%llu\n", name, s.count,
                s.mean, s.stddev, s.cv, static_cast<unsigned long long>(s.p50),
                static_cast<unsigned long long>(s.p99), static_cast<unsigned long long>(s.max));
  return buf;
}

}  // namespace

LatencyStats compute_stats(std::span<const uint64_t> samples, size_t warmup) {
  if (samples.size() <= warmup)
    throw StatsError("need at least one post-warmup sample (" + std::to_string(samples.size()) +
                     " total, " + std::to_string(warmup) + " warmup)");

  std::vector<uint64_t> sorted(samples.begin() + warmup, samples.end());
  std::sort(sorted.begin(), sorted.end());

  LatencyStats out;
  out.count = sorted.size();
  double sum = 0.0;
  for (uint64_t v : sorted) sum += static_cast<double>(v);
  out.mean = sum / static_cast<double>(out.count);
  double sq = 0.0;
  for (uint64_t v : sorted) {
    const double d = static_cast<double>(v) - out.mean;
    sq += d * d;
  }
  out.stddev = std::sqrt(sq / static_cast<double>(out.count));
  out.cv = out.mean == 0.0 ? 0.0 : out.stddev / out.mean;
  out.p50 = nearest_rank(sorted, 50);
  out.p99 = nearest_rank(sorted, 99);
  out.max = sorted.back();
  return out;
}

KernelBenchReport run_kernel_bench(const CompiledModel& model, size_t iterations, size_t warmup,
                                   const SimConfig& cfg) {
  if (iterations == 0) throw StatsError("zero iterations");

  RuntimeSession session(cfg);
  session.load_image(model.image);
  session.load_plan(model.rcbs, model.manifest);

  std::vector<uint8_t> input(session.manifest().input_bytes());
  std::mt19937 rng(0x7412);
  for (auto& b : input) b = static_cast<uint8_t>(rng());

  std::vector<uint64_t> e2e;
  std::array<std::vector<uint64_t>, 3> stage_samples;
  e2e.reserve(iterations);
  for (auto& s : stage_samples) s.reserve(iterations);

  std::vector<ExecTrace> reference;
  bool identical = true;
  for (size_t i = 0; i < iterations; ++i) {
    const uint64_t before = session.device().ticks();
    session.run(input);
    e2e.push_back(session.device().ticks() - before);

    std::array<uint64_t, 3> stages{};
    for (const ExecTrace& t : session.last_traces())
      for (int s = 0; s < 3; ++s) stages[s] += t.stage_ticks[s];
    for (int s = 0; s < 3; ++s) stage_samples[s].push_back(stages[s]);

    if (i == warmup) reference = session.last_traces();
    if (i > warmup && !(session.last_traces() == reference)) identical = false;
  }

  KernelBenchReport report;
  report.iterations = iterations;
  report.warmup = warmup;
  report.end_to_end = compute_stats(e2e, warmup);
  for (int s = 0; s < 3; ++s) report.stages[s] = compute_stats(stage_samples[s], warmup);
  report.traces_identical = identical && iterations > warmup;
  return report;
}

std::string KernelBenchReport::to_text() const {
  std::string out = "latency over " + std::to_string(iterations) + " inferences (" +
                    std::to_string(warmup) + " warmup), virtual ticks\n";
  out += "  series           mean       stddev       cv        p50        p99        max\n";
  out += fmt_line("e2e", end_to_end);
  out += fmt_line("input", stages[kStageInput]);
  out += fmt_line("compute", stages[kStageCompute]);
  out += fmt_line("output", stages[kStageOutput]);
  out += std::string("  traces: ") + (traces_identical ? "bit-identical" : "DIVERGED") + "\n";
  return out;
}

std::string KernelBenchReport::to_csv() const {
  std::string out = "series,count,mean,stddev,cv,p50,p99,max\n";
  out += csv_line("e2e", end_to_end);
  out += csv_line("input", stages[kStageInput]);
  out += csv_line("compute", stages[kStageCompute]);
  out += csv_line("output", stages[kStageOutput]);
  return out;
}

TransferSweepReport run_transfer_sweep(const std::vector<uint32_t>& block_sizes, uint64_t volume,
                                       uint32_t mediation_penalty, const SimConfig& cfg) {
  if (block_sizes.empty()) throw BenchError("empty block-size list");
  if (volume == 0) throw BenchError("zero transfer volume");
  for (uint32_t s : block_sizes) {
    if (s == 0) throw BenchError("zero block size");
    if (s > cfg.local_mem_bytes)
      throw BenchError("block size " + std::to_string(s) + " exceeds tile-local memory (" +
                       std::to_string(cfg.local_mem_bytes) + ")");
  }

  const auto measure = [&](uint32_t setup_cost, uint32_t size, size_t transfers) {
    SimConfig c = cfg;
    c.dma_setup_cost = setup_cost;
    SimDevice dev(c);
    const uint64_t dst = tile_base(0, 0, c.grid.cols) + kTileLocalMemOffset;
    const uint64_t before = dev.ticks();
    for (size_t i = 0; i < transfers; ++i)
      dev.wait_dma(dev.initiate_dma({DmaDir::ToDevice, kGlobalBase, dst, size}));
    return dev.ticks() - before;
  };

  TransferSweepReport report;
  report.volume = volume;
  report.dma_setup_cost = cfg.dma_setup_cost;
  report.mediation_penalty = mediation_penalty;
  report.dma_bytes_per_tick = cfg.dma_bytes_per_tick;

  for (uint32_t size : block_sizes) {
    SweepRow row;
    row.block_size = size;
    row.transfers = static_cast<size_t>((volume + size - 1) / size);
    row.direct_ticks = measure(cfg.dma_setup_cost, size, row.transfers);
    row.mediated_ticks = measure(cfg.dma_setup_cost + mediation_penalty, size, row.transfers);
    row.measured_speedup =
        static_cast<double>(row.mediated_ticks) / static_cast<double>(row.direct_ticks);
    const double move = std::ceil(static_cast<double>(size) / cfg.dma_bytes_per_tick);
    row.predicted_speedup = (cfg.dma_setup_cost + mediation_penalty + move) /
                            (cfg.dma_setup_cost + move);
    report.rows.push_back(row);
  }
  return report;
}

std::string TransferSweepReport::to_text() const {
  char head[200];
  std::snprintf(head, sizeof(head),
                "transfer sweep: %llu bytes/path, +%u ticks per mediated transfer\n",
                static_cast<unsigned long long>(volume), mediation_penalty);
  std::string out = head;
  out += "  block      transfers    direct      mediated   speedup  predicted\n";
  for (const SweepRow& r : rows) {
    char buf[200];
    std::snprintf(buf, sizeof(buf), "  %-10u %-10zu %-11llu %-11llu %8.4f %10.4f\n",
                  r.block_size, r.transfers, static_cast<unsigned long long>(r.direct_ticks),
                  static_cast<unsigned long long>(r.mediated_ticks), r.measured_speedup,
                  r.predicted_speedup);
    out += buf;
  }
  return out;
}

std::string TransferSweepReport::to_csv() const {
  std::string out = "block_size,transfers,direct_ticks,mediated_ticks,speedup,predicted\n";
  for (const SweepRow& r : rows) {
    char buf[200];
    std::snprintf(buf, sizeof(buf), "%u,%zu,%llu,%llu,%.6f,%.6f\n", r.block_size, r.transfers,
                  static_cast<unsigned long long>(r.direct_ticks),
                  static_cast<unsigned long long>(r.mediated_ticks), r.measured_speedup,
                  r.predicted_speedup);
    out += buf;
  }
  return out;
}

}  // namespace tilert
