// SPDX-FileCopyrightText: (c) 2026 tilert contributors
// SPDX-License-Identifier: Apache-2.0

#include "tilert/bench.hpp"

#include <cmath>
#include <vector>

#include "doctest.h"
#include "tilert/compiler.hpp"

using namespace tilert;

namespace {

CompiledModel tiny_matmul() {
  const char* text = R"({
    "nodes": [{"name": "mm", "kernel": "MATMUL_I8", "params": [8, 8, 8]}],
    "edges": [
      {"from": "a", "to": "mm:a", "shape": [8, 8], "dtype": "i8"},
      {"from": "b", "to": "mm:b", "shape": [8, 8], "dtype": "i8"}
    ],
    "inputs": ["a", "b"],
    "outputs": ["mm:out"]})";
  return compile_graph(text, {});
}

}  // namespace

TEST_SUITE_BEGIN("bench");

TEST_CASE("latency stats over a hand sample") {
  const uint64_t samples[] = {1, 2, 3};
  const LatencyStats s = compute_stats(samples);
  CHECK(s.count == 3);
  CHECK(s.mean == doctest::Approx(2.0));
  CHECK(s.stddev == doctest::Approx(std::sqrt(2.0 / 3.0)));  // population
  CHECK(s.cv == doctest::Approx(std::sqrt(2.0 / 3.0) / 2.0));
  CHECK(s.p50 == 2);
  CHECK(s.p99 == 3);
  CHECK(s.max == 3);
}

TEST_CASE("warmup drops leading samples") {
  const uint64_t samples[] = {100, 5, 5, 5};
  const LatencyStats s = compute_stats(samples, 1);
  CHECK(s.count == 3);
  CHECK(s.mean == doctest::Approx(5.0));
  CHECK(s.stddev == 0.0);
  CHECK(s.cv == 0.0);
  CHECK(s.max == 5);
}

TEST_CASE("a single sample is its own distribution") {
  const uint64_t one[] = {7};
  const LatencyStats s = compute_stats(one);
  CHECK(s.mean == doctest::Approx(7.0));
  CHECK(s.cv == 0.0);
  CHECK(s.p50 == 7);
  CHECK(s.p99 == 7);
}

TEST_CASE("stats over nothing are refused") {
  CHECK_THROWS_AS(compute_stats({}), StatsError);
  const uint64_t two[] = {1, 2};
  CHECK_THROWS_AS(compute_stats(two, 2), StatsError);
  CHECK_THROWS_AS(compute_stats(two, 5), StatsError);
}

TEST_CASE("kernel bench: the virtual clock makes latency exact") {
  const KernelBenchReport r = run_kernel_bench(tiny_matmul(), 6, 2);
  CHECK(r.iterations == 6);
  CHECK(r.warmup == 2);
  CHECK(r.end_to_end.count == 4);

  // Data-independent cost model + fixed addresses: zero jitter by design.
  CHECK(r.end_to_end.cv == 0.0);
  CHECK(r.end_to_end.p50 == r.end_to_end.max);
  CHECK(r.traces_identical);
  for (const LatencyStats& st : r.stages) {
    CHECK(st.mean > 0.0);
    CHECK(st.cv == 0.0);
  }

  const std::string text = r.to_text();
  CHECK(text.find("e2e") != std::string::npos);
  CHECK(text.find("p99") != std::string::npos);
  const std::string csv = r.to_csv();
  CHECK(csv.find(',') != std::string::npos);
}

TEST_CASE("transfer sweep matches its closed form") {
  const std::vector<uint32_t> sizes = {1024, 4096, 16384, 32768};
  const TransferSweepReport r = run_transfer_sweep(sizes, 1u << 20);

  REQUIRE(r.rows.size() == sizes.size());
  CHECK(r.volume == 1u << 20);
  const double c = r.dma_setup_cost;       // 100 under the default sim config
  const double p = r.mediation_penalty;    // 600 by default
  const double b = r.dma_bytes_per_tick;   // 64

  for (size_t i = 0; i < r.rows.size(); ++i) {
    const SweepRow& row = r.rows[i];
    CHECK(row.block_size == sizes[i]);
    CHECK(row.transfers == (1u << 20) / sizes[i]);
    const double blocks = std::ceil(sizes[i] / b);
    CHECK(row.predicted_speedup == doctest::Approx((c + p + blocks) / (c + blocks)));
    // The measured ratio comes off the virtual clock; with the volume an
    // exact multiple of every block size the two must agree exactly.
    CHECK(std::fabs(row.measured_speedup - row.predicted_speedup) <= 1e-12);
    CHECK(row.direct_ticks ==
          row.transfers * (static_cast<uint64_t>(c) + static_cast<uint64_t>(blocks)));
    if (i > 0) CHECK(row.measured_speedup < r.rows[i - 1].measured_speedup);
  }

  CHECK(r.to_text().find("speedup") != std::string::npos);
  CHECK(r.to_csv().find("block_size") != std::string::npos);
}

TEST_CASE("sweep inputs are validated") {
  CHECK_THROWS_AS(run_transfer_sweep({}, 1 << 20), BenchError);
  CHECK_THROWS_AS(run_transfer_sweep({0}, 1 << 20), BenchError);
  CHECK_THROWS_AS(run_transfer_sweep({1024}, 0), BenchError);
  CHECK_THROWS_AS(run_transfer_sweep({SimConfig{}.local_mem_bytes + 64}, 1 << 20), BenchError);
}

TEST_SUITE_END();
