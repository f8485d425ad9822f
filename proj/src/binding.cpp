// SPDX-FileCopyrightText: (c) 2026 tilert contributors
// SPDX-License-Identifier: Apache-2.0

#include "tilert/binding.hpp"

#include <algorithm>
#include <set>

#include "tilert/errors.hpp"

namespace tilert {

namespace {

uint64_t align_up(uint64_t x, uint64_t a) { return (x + a - 1) / a * a; }

/// Calls fn(ref&, access_len) for every AddrRef in the op. The access length
/// is how many bytes the op touches at the ref, for bounds checks.
template <typename Fn>
void for_each_ref(Operation& op, Fn&& fn) {
  std::visit(
      [&](auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, RegWriteOp> || std::is_same_v<T, RegReadOp>) {
          fn(p.addr, uint32_t{4});
        } else if constexpr (std::is_same_v<T, WriteBlockOp>) {
          fn(p.addr, static_cast<uint32_t>(p.data.size()));
        } else if constexpr (std::is_same_v<T, DmaTriggerOp>) {
          fn(p.src, p.length);
          fn(p.dst, p.length);
        } else if constexpr (std::is_same_v<T, PollMaskOp>) {
          fn(p.addr, uint32_t{4});
        } else if constexpr (std::is_same_v<T, CacheFlushOp> ||
                             std::is_same_v<T, CacheInvalidateOp>) {
          fn(p.addr, p.length);
        }
        // WaitEventOp carries no address.
      },
      op.payload);
}

template <typename Fn>
void for_each_ref(const Operation& op, Fn&& fn) {
  for_each_ref(const_cast<Operation&>(op),
               [&](AddrRef& r, uint32_t len) { fn(static_cast<const AddrRef&>(r), len); });
}

}  // namespace

const char* buffer_class_name(BufferClass c) {
  switch (c) {
    case BufferClass::Weight: return "WEIGHT";
    case BufferClass::Activation: return "ACTIVATION";
    case BufferClass::Input: return "INPUT";
    case BufferClass::Output: return "OUTPUT";
  }
  return "?";
}

Rcb bind(const Rcb& rcb, const BindingTable& table, const GridConfig& grid) {
  // First pass: collect every unknown symbol so the failure names them all.
  std::set<uint32_t> missing;
  for (const auto& op : rcb.ops) {
    for_each_ref(op, [&](const AddrRef& ref, uint32_t) {
      if (ref.kind == AddrKind::Symbolic && table.find(ref.buffer_id) == nullptr)
        missing.insert(ref.buffer_id);
    });
  }
  if (!missing.empty())
    throw UnresolvedSymbol(std::vector<uint32_t>(missing.begin(), missing.end()));

  Rcb out = rcb;
  for (size_t i = 0; i < out.ops.size(); ++i) {
    for_each_ref(out.ops[i], [&](AddrRef& ref, uint32_t access_len) {
      switch (ref.kind) {
        case AddrKind::Absolute:
          return;
        case AddrKind::RelativeTile: {
          if (ref.col >= grid.cols || ref.row >= grid.rows)
            throw RangeError("op " + std::to_string(i) + ": tile (" + std::to_string(ref.col) +
                             "," + std::to_string(ref.row) + ") outside " +
                             std::to_string(grid.cols) + "x" + std::to_string(grid.rows) +
                             " grid");
          ref = AddrRef::absolute(tile_base(ref.col, ref.row, grid.cols) + ref.tile_offset);
          return;
        }
        case AddrKind::Symbolic: {
          const Binding* b = table.find(ref.buffer_id);
          if (uint64_t{ref.offset} + access_len > b->size)
            throw RangeError("op " + std::to_string(i) + ": buffer " +
                             std::to_string(ref.buffer_id) + " offset " +
                             std::to_string(ref.offset) + " + " + std::to_string(access_len) +
                             " exceeds size " + std::to_string(b->size));
          ref = AddrRef::absolute(b->address + ref.offset);
          return;
        }
      }
    });
  }
  return out;
}

bool fully_resolved(const Rcb& rcb) {
  for (const auto& op : rcb.ops) {
    bool bad = false;
    for_each_ref(op, [&](const AddrRef& ref, uint32_t) {
      if (ref.kind != AddrKind::Absolute) bad = true;
    });
    if (bad) return false;
  }
  return true;
}

std::vector<uint32_t> symbolic_refs(const Rcb& rcb) {
  std::set<uint32_t> ids;
  for (const auto& op : rcb.ops)
    for_each_ref(op, [&](const AddrRef& ref, uint32_t) {
      if (ref.kind == AddrKind::Symbolic) ids.insert(ref.buffer_id);
    });
  return {ids.begin(), ids.end()};
}

const BufferPlan* AllocationPlan::find(uint32_t buffer_id) const {
  for (const auto& b : buffers)
    if (b.buffer_id == buffer_id) return &b;
  return nullptr;
}

AllocationPlan plan_buffers(const std::vector<Rcb>& pipeline, const Manifest& manifest) {
  // Lifetimes: [first RCB referencing the id, last RCB referencing it].
  std::map<uint32_t, std::pair<int, int>> lifetime;
  for (size_t i = 0; i < pipeline.size(); ++i) {
    for (uint32_t id : symbolic_refs(pipeline[i])) {
      auto [it, inserted] = lifetime.emplace(id, std::pair{int(i), int(i)});
      if (!inserted) it->second.second = static_cast<int>(i);
    }
  }

  std::vector<uint32_t> gaps;
  for (const auto& [id, life] : lifetime) {
    (void)life;
    if (manifest.find(id) == manifest.end()) gaps.push_back(id);
  }
  if (!gaps.empty()) {
    std::string msg = "manifest missing buffer ids:";
    for (uint32_t id : gaps) msg += ' ' + std::to_string(id);
    throw PlanError(msg);
  }

  // Outputs are read back only after the final block, so their space must
  // survive the whole pipeline even when no later block references them.
  for (auto& [id, life] : lifetime)
    if (manifest.at(id).cls == BufferClass::Output)
      life.second = static_cast<int>(pipeline.size()) - 1;

  AllocationPlan plan;
  for (const auto& [id, life] : lifetime) {
    BufferPlan b;
    b.buffer_id = id;
    b.first_use = life.first;
    b.last_use = life.second;
    b.spec = manifest.at(id);
    plan.buffers.push_back(b);
  }
  std::sort(plan.buffers.begin(), plan.buffers.end(), [](const BufferPlan& a, const BufferPlan& b) {
    return std::tie(a.first_use, a.buffer_id) < std::tie(b.first_use, b.buffer_id);
  });

  // Greedy lifetime-ordered offset assignment over a simulated free list;
  // buffers whose intervals are disjoint may land on the same offsets.
  struct FreeBlock {
    uint64_t addr, size;
  };
  std::vector<FreeBlock> free_list{{0, UINT64_MAX}};
  auto carve = [&](uint32_t size, uint32_t alignment) -> uint64_t {
    for (size_t i = 0; i < free_list.size(); ++i) {
      const uint64_t aligned = align_up(free_list[i].addr, alignment);
      const uint64_t end = free_list[i].addr + free_list[i].size;
      if (aligned + size > end) continue;
      const FreeBlock block = free_list[i];
      free_list.erase(free_list.begin() + i);
      std::vector<FreeBlock> add;
      if (aligned > block.addr) add.push_back({block.addr, aligned - block.addr});
      if (aligned + size < end) add.push_back({aligned + size, end - (aligned + size)});
      free_list.insert(free_list.begin() + i, add.begin(), add.end());
      return aligned;
    }
    throw PlanError("planner free list exhausted");  // unreachable: list is unbounded
  };
  auto restore = [&](uint64_t addr, uint64_t size) {
    auto it = std::lower_bound(free_list.begin(), free_list.end(), addr,
                               [](const FreeBlock& b, uint64_t a) { return b.addr < a; });
    it = free_list.insert(it, {addr, size});
    if (it + 1 != free_list.end() && it->addr + it->size == (it + 1)->addr) {
      it->size += (it + 1)->size;
      free_list.erase(it + 1);
    }
    if (it != free_list.begin() && (it - 1)->addr + (it - 1)->size == it->addr) {
      (it - 1)->size += it->size;
      free_list.erase(it);
    }
  };

  // Sweep in first_use order; before placing a buffer, return every earlier
  // buffer whose lifetime ended before this one begins.
  std::vector<BufferPlan*> live;
  uint64_t live_bytes = 0;
  for (auto& b : plan.buffers) {
    if (b.spec.cls == BufferClass::Weight) continue;  // resident in the image
    for (auto it = live.begin(); it != live.end();) {
      if ((*it)->last_use < b.first_use) {
        restore(*(*it)->offset, (*it)->spec.size);
        live_bytes -= (*it)->spec.size;
        it = live.erase(it);
      } else {
        ++it;
      }
    }
    b.offset = carve(b.spec.size, b.spec.alignment);
    live.push_back(&b);
    live_bytes += b.spec.size;
    plan.peak_live_bytes = std::max(plan.peak_live_bytes, live_bytes);
    plan.peak_live_regions = std::max(plan.peak_live_regions, live.size());
    plan.arena_bytes_required = std::max(plan.arena_bytes_required, *b.offset + b.spec.size);
  }
  return plan;
}

std::vector<uint32_t> release_after(const AllocationPlan& plan, int rcb_index) {
  std::vector<uint32_t> ids;
  for (const auto& b : plan.buffers)
    if (b.spec.cls != BufferClass::Weight && b.last_use == rcb_index)
      ids.push_back(b.buffer_id);
  std::sort(ids.begin(), ids.end());  // id order, not plan order
  return ids;
}

}  // namespace tilert
