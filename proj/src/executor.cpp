// SPDX-FileCopyrightText: (c) 2026 tilert contributors
// SPDX-License-Identifier: Apache-2.0

#include "tilert/executor.hpp"

#include <algorithm>
#include <cstdio>

namespace tilert {

namespace {

std::string hex(uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%llX", static_cast<unsigned long long>(v));
  return buf;
}

int stage_of(const Operation& op) {
  return std::visit(
      [](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, DmaTriggerOp>)
          return p.direction == DmaDir::ToDevice ? kStageInput : kStageOutput;
        else if constexpr (std::is_same_v<T, CacheFlushOp>)
          return kStageInput;
        else if constexpr (std::is_same_v<T, CacheInvalidateOp>)
          return kStageOutput;
        else
          return kStageCompute;
      },
      op.payload);
}

}  // namespace

const char* outcome_name(OpOutcome o) {
  switch (o) {
    case OpOutcome::Ok: return "OK";
    case OpOutcome::Timeout: return "TIMEOUT";
    case OpOutcome::Fault: return "FAULT";
  }
  return "?";
}

std::string ExecTrace::to_text() const {
  std::string out;
  for (const auto& r : records) {
    out += std::to_string(r.op_index);
    out += ' ';
    out += opcode_name(r.opcode);
    out += ' ';
    if (r.opcode == OpCode::DmaTrigger) {
      out += hex(r.addr);
      out += "->";
      out += hex(r.addr2);
    } else if (r.opcode == OpCode::WaitEvent) {
      out += "event:" + std::to_string(r.addr);
    } else {
      out += hex(r.addr);
    }
    out += ' ';
    out += outcome_name(r.outcome);
    out += ' ';
    out += std::to_string(r.tick);
    out += '\n';
  }
  return out;
}

ExecTrace execute(const Rcb& rcb, HalDriver& hal, EventSource* events) {
  if (!fully_resolved(rcb))
    throw ValidationError("execute: rcb contains unresolved refs; bind it first");

  ExecTrace trace;
  trace.records.reserve(rcb.ops.size());

  // Timestamps are block-relative so identical blocks replay to identical
  // traces no matter where the backend clock already stands.
  const uint64_t origin = hal.ticks();

  for (size_t i = 0; i < rcb.ops.size(); ++i) {
    const Operation& op = rcb.ops[i];
    TraceRecord rec;
    rec.op_index = static_cast<int>(i);
    rec.opcode = op.opcode();

    const uint64_t before = hal.ticks();
    auto retire = [&](OpOutcome outcome) {
      rec.outcome = outcome;
      rec.tick = hal.ticks() - origin;
      trace.stage_ticks[stage_of(op)] += hal.ticks() - before;
      trace.records.push_back(rec);
    };

    try {
      std::visit(
          [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, RegWriteOp>) {
              rec.addr = p.addr.addr;
              hal.write32(p.addr.addr, p.value);
            } else if constexpr (std::is_same_v<T, RegReadOp>) {
              rec.addr = p.addr.addr;
              const uint32_t v = hal.read32(p.addr.addr);
              if (trace.capture_slots.size() <= p.capture_slot)
                trace.capture_slots.resize(p.capture_slot + 1, 0);
              trace.capture_slots[p.capture_slot] = v;
            } else if constexpr (std::is_same_v<T, WriteBlockOp>) {
              rec.addr = p.addr.addr;
              hal.write_block(p.addr.addr, p.data.data(), p.data.size());
            } else if constexpr (std::is_same_v<T, DmaTriggerOp>) {
              rec.addr = p.src.addr;
              rec.addr2 = p.dst.addr;
              DmaRequest req;
              req.direction = p.direction;
              req.src = p.src.addr;
              req.dst = p.dst.addr;
              req.length = p.length;
              // Awaited eagerly: correctness over transfer/compute overlap.
              hal.wait_dma(hal.initiate_dma(req));
            } else if constexpr (std::is_same_v<T, PollMaskOp>) {
              rec.addr = p.addr.addr;
              if (!hal.poll_register_masked(p.addr.addr, p.mask, p.expected, p.timeout_us)) {
                retire(OpOutcome::Timeout);
                throw ExecError(ExecError::Kind::Timeout, rec.op_index,
                                "op " + std::to_string(i) + ": poll of " + hex(p.addr.addr) +
                                    " timed out after " + std::to_string(p.timeout_us) +
                                    " ticks",
                                trace);
              }
            } else if constexpr (std::is_same_v<T, CacheFlushOp>) {
              rec.addr = p.addr.addr;
              hal.flush_cache(p.addr.addr, p.length);
            } else if constexpr (std::is_same_v<T, CacheInvalidateOp>) {
              rec.addr = p.addr.addr;
              hal.invalidate_cache(p.addr.addr, p.length);
            } else if constexpr (std::is_same_v<T, WaitEventOp>) {
              rec.addr = p.event_id;
              if (!events) {
                retire(OpOutcome::Fault);
                throw ExecError(ExecError::Kind::EventWait, rec.op_index,
                                "op " + std::to_string(i) + ": WAIT_EVENT with no event source",
                                trace);
              }
              CompletionEvent ev;
              while (true) {
                if (!events->pop_event(ev)) {
                  retire(OpOutcome::Fault);
                  throw ExecError(ExecError::Kind::EventWait, rec.op_index,
                                  "op " + std::to_string(i) + ": event " +
                                      std::to_string(p.event_id) + " never arrived",
                                  trace);
                }
                if (ev.event_id == p.event_id) break;
                trace.unmatched.push_back(ev);
              }
            }
          },
          op.payload);
    } catch (ExecError&) {
      throw;
    } catch (const Error& e) {
      retire(OpOutcome::Fault);
      throw ExecError(ExecError::Kind::Fault, rec.op_index,
                      "op " + std::to_string(i) + ": " + e.what(), trace);
    }
    retire(OpOutcome::Ok);
  }
  return trace;
}

PipelineResult execute_pipeline(const std::vector<Rcb>& rcbs, const AllocationPlan& plan,
                                uint64_t arena_base, HalDriver& hal, HostMemory& host,
                                EventSource* events) {
  PipelineResult result;
  for (size_t i = 0; i < rcbs.size(); ++i) {
    for (uint32_t dep : rcbs[i].deps)
      if (dep >= i)
        throw PipelineError("rcb " + std::to_string(i) + " depends on rcb " +
                            std::to_string(dep) + " which has not executed yet");
    result.traces.push_back(execute(rcbs[i], hal, events));
    result.released.push_back(release_after(plan, static_cast<int>(i)));
  }

  std::vector<const BufferPlan*> outs;
  for (const auto& b : plan.buffers)
    if (b.spec.cls == BufferClass::Output && b.offset) outs.push_back(&b);
  std::sort(outs.begin(), outs.end(),
            [](const BufferPlan* a, const BufferPlan* b) { return a->buffer_id < b->buffer_id; });
  for (const BufferPlan* b : outs) {
    const uint64_t addr = arena_base + *b->offset;
    hal.invalidate_cache(addr, b->spec.size);
    std::vector<uint8_t> bytes(b->spec.size);
    host.host_read(addr, bytes);
    result.outputs.emplace_back(b->buffer_id, std::move(bytes));
  }
  return result;
}

}  // namespace tilert
