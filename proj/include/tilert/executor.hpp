// SPDX-FileCopyrightText: (c) 2026 tilert contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tilert/binding.hpp"
#include "tilert/errors.hpp"
#include "tilert/hal.hpp"
#include "tilert/rcb.hpp"

namespace tilert {

// Fetch-decode-dispatch engine: walks a resolved RCB's operation stream in
// order, mapping each op onto one HAL primitive, and records a trace with
// virtual timestamps. Halts at the first error, carrying the partial trace.

enum class OpOutcome : uint8_t { Ok, Timeout, Fault };

const char* outcome_name(OpOutcome o);

struct TraceRecord {
  int op_index = 0;
  OpCode opcode = OpCode::RegWrite;
  uint64_t addr = 0;   // primary address; event_id for WAIT_EVENT
  uint64_t addr2 = 0;  // DMA destination (DMA_TRIGGER only)
  OpOutcome outcome = OpOutcome::Ok;
  uint64_t tick = 0;  // virtual ticks since the block started, at retirement
  bool operator==(const TraceRecord&) const = default;
};

// Stage accounting buckets for telemetry/benchmarks: data movement toward
// the device, on-device work, data movement back.
inline constexpr int kStageInput = 0;
inline constexpr int kStageCompute = 1;
inline constexpr int kStageOutput = 2;

struct ExecTrace {
  std::vector<TraceRecord> records;
  std::vector<uint32_t> capture_slots;          // REG_READ destinations
  std::array<uint64_t, 3> stage_ticks{};        // indexed by kStage*
  std::vector<CompletionEvent> unmatched;       // events skipped by WAIT_EVENT

  /// One line per record: "index opcode address outcome tick".
  std::string to_text() const;

  bool operator==(const ExecTrace&) const = default;
};

class ExecError : public Error {
 public:
  enum class Kind { Timeout, Fault, EventWait };

  ExecError(Kind kind, int op_index, const std::string& what, ExecTrace partial)
      : Error(what), kind(kind), op_index(op_index), partial(std::move(partial)) {}

  Kind kind;
  int op_index;
  ExecTrace partial;  // everything executed up to and including the failing op
};

/// Dispatches every op against the HAL. `events` feeds WAIT_EVENT; passing
/// nullptr makes any WAIT_EVENT fail. Throws ExecError (halt on first error)
/// and ValidationError if the rcb still contains unresolved refs.
ExecTrace execute(const Rcb& rcb, HalDriver& hal, EventSource* events = nullptr);

struct PipelineResult {
  // Output-class buffers in manifest id order: (buffer_id, payload).
  std::vector<std::pair<uint32_t, std::vector<uint8_t>>> outputs;
  std::vector<ExecTrace> traces;
  std::vector<std::vector<uint32_t>> released;  // release_after per RCB index
};

/// Runs resolved RCBs in order. RCB ids are pipeline indices; a dependency
/// naming an index not yet executed is a PipelineError. Output buffers are
/// read back from arena_base + plan offset after the last RCB (the output
/// range is cache-invalidated first so the host view is current).
PipelineResult execute_pipeline(const std::vector<Rcb>& rcbs, const AllocationPlan& plan,
                                uint64_t arena_base, HalDriver& hal, HostMemory& host,
                                EventSource* events = nullptr);

}  // namespace tilert
