// SPDX-FileCopyrightText: (c) 2026 tilert contributors
// SPDX-License-Identifier: Apache-2.0

#include "tilert/executor.hpp"

#include <cstring>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "tilert/sim_device.hpp"

using namespace tilert;

namespace {

Operation make(OpPayload payload) {
  Operation op;
  op.payload = std::move(payload);
  return op;
}

const uint64_t kT00 = tile_base(0, 0, 4);  // first tile of the default grid

}  // namespace

TEST_SUITE_BEGIN("executor");

TEST_CASE("trace records address, outcome and block-relative tick per op") {
  SimDevice dev;
  std::vector<uint8_t> pattern(64);
  for (size_t i = 0; i < pattern.size(); ++i) pattern[i] = static_cast<uint8_t>(i * 3);
  dev.host_write(kGlobalBase, pattern);

  Rcb rcb;
  rcb.ops.push_back(make(RegWriteOp{AddrRef::absolute(kT00 + kRegKernelId), 5}));
  rcb.ops.push_back(make(DmaTriggerOp{DmaDir::ToDevice, AddrRef::absolute(kGlobalBase),
                                      AddrRef::absolute(kT00 + kTileLocalMemOffset), 64}));
  rcb.ops.push_back(make(RegReadOp{AddrRef::absolute(kT00 + kRegKernelId), 0}));

  const ExecTrace trace = execute(rcb, dev);
  REQUIRE(trace.records.size() == 3);
  CHECK(trace.records[0] ==
        TraceRecord{0, OpCode::RegWrite, kT00 + kRegKernelId, 0, OpOutcome::Ok, 0});
  CHECK(trace.records[1] == TraceRecord{1, OpCode::DmaTrigger, kGlobalBase,
                                        kT00 + kTileLocalMemOffset, OpOutcome::Ok, 101});
  CHECK(trace.records[2] ==
        TraceRecord{2, OpCode::RegRead, kT00 + kRegKernelId, 0, OpOutcome::Ok, 101});
  CHECK(trace.capture_slots == std::vector<uint32_t>{5});
  CHECK(trace.stage_ticks == std::array<uint64_t, 3>{101, 0, 0});

  // Ticks count from the block start, so a replay on the same (now advanced)
  // clock produces the identical trace.
  CHECK(execute(rcb, dev) == trace);
}

TEST_CASE("poll timeout halts with the partial trace attached") {
  SimDevice dev;
  Rcb rcb;
  rcb.ops.push_back(make(RegWriteOp{AddrRef::absolute(kT00 + kRegKernelId), 1}));
  rcb.ops.push_back(
      make(PollMaskOp{AddrRef::absolute(kT00 + kRegStatus), kStatusDone, kStatusDone, 25}));
  rcb.ops.push_back(make(RegWriteOp{AddrRef::absolute(kT00 + kRegKernelId), 2}));  // never runs

  try {
    execute(rcb, dev);
    FAIL("poll against an idle tile cannot succeed");
  } catch (const ExecError& e) {
    CHECK(e.kind == ExecError::Kind::Timeout);
    CHECK(e.op_index == 1);
    CHECK(std::string(e.what()).find("op 1") != std::string::npos);
    REQUIRE(e.partial.records.size() == 2);
    CHECK(e.partial.records[1].outcome == OpOutcome::Timeout);
    CHECK(e.partial.records[1].tick == 25);  // one tick per sample, to the deadline
    CHECK(e.partial.stage_ticks[kStageCompute] == 25);
  }
}

TEST_CASE("address fault halts with the faulting op recorded") {
  SimDevice dev;
  Rcb rcb;
  rcb.ops.push_back(make(RegWriteOp{AddrRef::absolute(0xDEAD), 1}));
  try {
    execute(rcb, dev);
    FAIL("unmapped write must fault");
  } catch (const ExecError& e) {
    CHECK(e.kind == ExecError::Kind::Fault);
    CHECK(e.op_index == 0);
    REQUIRE(e.partial.records.size() == 1);
    CHECK(e.partial.records[0].outcome == OpOutcome::Fault);
  }
}

TEST_CASE("unresolved refs are rejected before any dispatch") {
  SimDevice dev;
  Rcb sym;
  sym.ops.push_back(make(RegWriteOp{AddrRef::symbolic(1, 0), 0}));
  CHECK_THROWS_AS(execute(sym, dev), ValidationError);

  Rcb rel;
  rel.ops.push_back(make(RegWriteOp{AddrRef::tile(0, 0, kRegCtrl), 0}));
  CHECK_THROWS_AS(execute(rel, dev), ValidationError);
  CHECK(dev.ticks() == 0);  // nothing ran
}

TEST_CASE("wait-event skips mismatched completions and keeps them") {
  SimDevice dev;
  for (uint16_t col : {uint16_t{0}, uint16_t{1}}) {
    const uint64_t tb = tile_base(col, 0, 4);
    dev.write32(tb + kRegKernelId, static_cast<uint32_t>(KernelId::Passthrough));
    dev.write32(tb + kRegParam0, 64);
    dev.write32(tb + kRegCtrl, kCtrlStart);
  }
  REQUIRE(dev.pending_events() == 2);

  Rcb rcb;
  rcb.ops.push_back(make(WaitEventOp{2}));  // tile (1,0) = index 1 -> event id 2

  const ExecTrace trace = execute(rcb, dev, &dev);
  CHECK(trace.records[0].addr == 2);
  CHECK(trace.unmatched == std::vector<CompletionEvent>{{1, 0, 0}});
  CHECK(dev.pending_events() == 0);

  // Queue is now empty: the same wait can never be satisfied.
  try {
    execute(rcb, dev, &dev);
    FAIL("wait on a drained queue must fail");
  } catch (const ExecError& e) {
    CHECK(e.kind == ExecError::Kind::EventWait);
    CHECK(e.partial.records[0].outcome == OpOutcome::Fault);
  }

  // No event source wired at all.
  CHECK_THROWS_AS(execute(rcb, dev, nullptr), ExecError);
}

TEST_CASE("stage buckets: to-device, on-device, from-device") {
  SimDevice dev;
  std::vector<uint8_t> pattern(64);
  for (size_t i = 0; i < pattern.size(); ++i) pattern[i] = static_cast<uint8_t>(200 - i);
  dev.host_write(kGlobalBase, pattern);

  Rcb rcb;
  rcb.ops.push_back(make(DmaTriggerOp{DmaDir::ToDevice, AddrRef::absolute(kGlobalBase),
                                      AddrRef::absolute(kT00 + kTileLocalMemOffset), 64}));
  rcb.ops.push_back(make(RegWriteOp{AddrRef::absolute(kT00 + kRegKernelId),
                                    static_cast<uint32_t>(KernelId::Passthrough)}));
  rcb.ops.push_back(make(RegWriteOp{AddrRef::absolute(kT00 + kRegParam0), 64}));
  rcb.ops.push_back(make(RegWriteOp{AddrRef::absolute(kT00 + kRegCtrl), kCtrlStart}));
  rcb.ops.push_back(
      make(DmaTriggerOp{DmaDir::FromDevice, AddrRef::absolute(kT00 + kTileLocalMemOffset + 64),
                        AddrRef::absolute(kGlobalBase + 0x1000), 128}));

  const ExecTrace trace = execute(rcb, dev, &dev);
  CHECK(trace.stage_ticks == std::array<uint64_t, 3>{101, 1, 102});

  std::vector<uint8_t> out(64);
  dev.host_read(kGlobalBase + 0x1000, out);
  CHECK(out == pattern);  // passthrough moved the input to its output buffer
}

TEST_CASE("capture slots grow to the highest slot written") {
  SimDevice dev;
  dev.write32(kT00 + kRegKernelId, 7);
  Rcb rcb;
  rcb.ops.push_back(make(RegReadOp{AddrRef::absolute(kT00 + kRegKernelId), 3}));
  const ExecTrace trace = execute(rcb, dev);
  CHECK(trace.capture_slots == std::vector<uint32_t>{0, 0, 0, 7});
}

TEST_CASE("trace text is one fixed-form line per op") {
  SimDevice dev;
  Rcb rcb;
  rcb.ops.push_back(make(RegWriteOp{AddrRef::absolute(kT00 + kRegKernelId), 9}));
  rcb.ops.push_back(make(DmaTriggerOp{DmaDir::ToDevice, AddrRef::absolute(kGlobalBase),
                                      AddrRef::absolute(kT00 + kTileLocalMemOffset), 64}));
  rcb.ops.push_back(make(PollMaskOp{AddrRef::absolute(kT00 + kRegStatus), 0, 0, 10}));

  const ExecTrace trace = execute(rcb, dev);
  CHECK(trace.to_text() ==
        "0 REG_WRITE 0x10000008 OK 0\n"
        "1 DMA_TRIGGER 0x40000000->0x10001000 OK 101\n"
        "2 POLL_MASK 0x10000004 OK 102\n");
}

TEST_CASE("a hand-assembled matmul block reproduces the oracle") {
  SimDevice dev;
  std::mt19937 rng(0xE8);
  std::vector<int8_t> a(64), b(64);
  for (auto& v : a) v = static_cast<int8_t>(rng());
  for (auto& v : b) v = static_cast<int8_t>(rng());
  dev.host_write(kGlobalBase, std::span(reinterpret_cast<const uint8_t*>(a.data()), 64));
  dev.host_write(kGlobalBase + 64, std::span(reinterpret_cast<const uint8_t*>(b.data()), 64));

  // kernel_layout(MATMUL_I8, {8,8,8}): a @local+0, b @local+64, out @local+128.
  const uint64_t local = kT00 + kTileLocalMemOffset;
  Rcb rcb;
  rcb.block_type = BlockType::Compute;
  rcb.ops.push_back(make(RegWriteOp{AddrRef::absolute(kT00 + kRegKernelId),
                                    static_cast<uint32_t>(KernelId::MatmulI8)}));
  for (int p = 0; p < 3; ++p)
    rcb.ops.push_back(make(RegWriteOp{AddrRef::absolute(kT00 + reg_param(p)), 8}));
  rcb.ops.push_back(make(DmaTriggerOp{DmaDir::ToDevice, AddrRef::absolute(kGlobalBase),
                                      AddrRef::absolute(local), 64}));
  rcb.ops.push_back(make(DmaTriggerOp{DmaDir::ToDevice, AddrRef::absolute(kGlobalBase + 64),
                                      AddrRef::absolute(local + 64), 64}));
  rcb.ops.push_back(make(RegWriteOp{AddrRef::absolute(kT00 + kRegCtrl), kCtrlStart}));
  rcb.ops.push_back(
      make(PollMaskOp{AddrRef::absolute(kT00 + kRegStatus), kStatusDone, kStatusDone, 1000}));
  rcb.ops.push_back(make(DmaTriggerOp{DmaDir::FromDevice, AddrRef::absolute(local + 128),
                                      AddrRef::absolute(kGlobalBase + 4096), 256}));

  const ExecTrace trace = execute(rcb, dev, &dev);
  for (const auto& r : trace.records) CHECK(r.outcome == OpOutcome::Ok);
  CHECK(trace.stage_ticks == std::array<uint64_t, 3>{202, 2, 104});

  std::vector<uint8_t> raw(256);
  dev.host_read(kGlobalBase + 4096, raw);
  std::vector<int32_t> got(64);
  std::memcpy(got.data(), raw.data(), raw.size());
  CHECK(got == oracle::matmul_i8(a, b, 8, 8, 8));
}

TEST_CASE("pipeline rejects dependencies on blocks not yet executed") {
  SimDevice dev;
  AllocationPlan plan;

  std::vector<Rcb> self(1);
  self[0].deps = {0};
  CHECK_THROWS_AS(execute_pipeline(self, plan, kGlobalBase, dev, dev), PipelineError);

  std::vector<Rcb> forward(2);
  forward[0].ops.push_back(make(RegWriteOp{AddrRef::absolute(kT00 + kRegKernelId), 1}));
  forward[1].deps = {1};
  CHECK_THROWS_AS(execute_pipeline(forward, plan, kGlobalBase, dev, dev), PipelineError);

  forward[1].deps = {0};  // backward edge is fine
  CHECK_NOTHROW(execute_pipeline(forward, plan, kGlobalBase, dev, dev));
}

TEST_CASE("pipeline returns outputs in buffer-id order with release lists") {
  SimDevice dev;
  std::vector<uint8_t> first(64, 0xAA), second(64, 0xBB);
  const uint64_t local = kT00 + kTileLocalMemOffset;

  // Block 0 produces buffer 5, block 1 produces buffer 3: readback must come
  // back sorted by id, not by production order.
  std::vector<Rcb> pipeline(2);
  pipeline[0].ops.push_back(make(WriteBlockOp{AddrRef::absolute(local), first}));
  pipeline[0].ops.push_back(make(DmaTriggerOp{DmaDir::FromDevice, AddrRef::absolute(local),
                                              AddrRef::symbolic(5, 0), 64}));
  pipeline[1].deps = {0};
  pipeline[1].ops.push_back(make(WriteBlockOp{AddrRef::absolute(local), second}));
  pipeline[1].ops.push_back(make(DmaTriggerOp{DmaDir::FromDevice, AddrRef::absolute(local),
                                              AddrRef::symbolic(3, 0), 64}));

  Manifest manifest;
  manifest[3] = {64, 64, BufferClass::Output};
  manifest[5] = {64, 64, BufferClass::Output};
  const AllocationPlan plan = plan_buffers(pipeline, manifest);

  const uint64_t arena_base = kGlobalBase + 0x8000;
  BindingTable table;
  for (uint32_t id : {3u, 5u})
    table.bind(id, {Binding::Source::RuntimeRegion, arena_base + *plan.find(id)->offset, 64});
  std::vector<Rcb> bound;
  for (const auto& rcb : pipeline) bound.push_back(bind(rcb, table, GridConfig{}));

  const PipelineResult result = execute_pipeline(bound, plan, arena_base, dev, dev, &dev);
  REQUIRE(result.outputs.size() == 2);
  CHECK(result.outputs[0].first == 3);
  CHECK(result.outputs[0].second == second);
  CHECK(result.outputs[1].first == 5);
  CHECK(result.outputs[1].second == first);
  REQUIRE(result.traces.size() == 2);
  CHECK(result.released[0] == release_after(plan, 0));
  CHECK(result.released[1] == release_after(plan, 1));
  // Buffer 5 is an output: although block 1 never touches it, it must stay
  // live until the post-pipeline readback.
  CHECK(result.released[0].empty());
  CHECK(result.released[1] == std::vector<uint32_t>{3, 5});
  CHECK(*plan.find(3)->offset != *plan.find(5)->offset);
}

TEST_SUITE_END();
