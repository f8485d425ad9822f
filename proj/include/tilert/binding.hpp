// SPDX-FileCopyrightText: (c) 2026 tilert contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "tilert/device_map.hpp"
#include "tilert/rcb.hpp"

namespace tilert {

// Runtime binding layer: turns SYMBOLIC and RELATIVE_TILE references into
// absolute device addresses and plans region reuse for intermediate buffers
// across an RCB pipeline.

enum class BufferClass : uint8_t { Weight, Activation, Input, Output };

const char* buffer_class_name(BufferClass c);

/// Physical requirements of one logical tensor id, as emitted by the
/// compiler's manifest.
struct BufferSpec {
  uint32_t size = 0;
  uint32_t alignment = 64;  // matches the image/GMIO default
  BufferClass cls = BufferClass::Activation;
  bool operator==(const BufferSpec&) const = default;
};

using Manifest = std::map<uint32_t, BufferSpec>;  // buffer_id -> spec, ordered

struct Binding {
  enum class Source : uint8_t { RimfsFile, RuntimeRegion };
  Source source = Source::RuntimeRegion;
  uint64_t address = 0;
  uint32_t size = 0;
};

class BindingTable {
 public:
  void bind(uint32_t buffer_id, Binding b) { map_[buffer_id] = b; }
  const Binding* find(uint32_t buffer_id) const {
    auto it = map_.find(buffer_id);
    return it == map_.end() ? nullptr : &it->second;
  }
  size_t size() const { return map_.size(); }
  void clear() { map_.clear(); }

 private:
  std::map<uint32_t, Binding> map_;
};

/// Resolves every ref in `rcb` to ABSOLUTE. SYMBOLIC {id, off} maps to
/// table[id].address + off after an access-length bounds check against the
/// bound size; RELATIVE_TILE maps through the tile-address formula. All
/// missing symbols are collected before failing so a broken model reports
/// every gap at once.
Rcb bind(const Rcb& rcb, const BindingTable& table, const GridConfig& grid);

/// True when no SYMBOLIC or RELATIVE_TILE ref remains (what execute expects).
bool fully_resolved(const Rcb& rcb);

/// Scans one RCB for the symbolic buffer IDs it references.
std::vector<uint32_t> symbolic_refs(const Rcb& rcb);

// ---- pipeline buffer planning ----

struct BufferPlan {
  uint32_t buffer_id = 0;
  int first_use = 0;  // RCB index of first reference
  int last_use = 0;   // RCB index of last reference
  BufferSpec spec;
  // Arena placement, as an offset from the arena base. Weights live in the
  // mounted image instead and carry no offset.
  std::optional<uint64_t> offset;
};

struct AllocationPlan {
  std::vector<BufferPlan> buffers;     // ordered by (first_use, buffer_id)
  uint64_t peak_live_bytes = 0;        // max concurrent non-weight bytes
  size_t peak_live_regions = 0;        // max concurrent non-weight regions
  uint64_t arena_bytes_required = 0;   // high-water offset the plan needs

  const BufferPlan* find(uint32_t buffer_id) const;
};

/// Computes buffer lifetimes over the pipeline and assigns arena offsets
/// greedily in lifetime order; disjoint lifetimes may share space. Every
/// symbolic id referenced by the pipeline must appear in the manifest.
AllocationPlan plan_buffers(const std::vector<Rcb>& pipeline, const Manifest& manifest);

/// IDs whose last use is exactly `rcb_index` (weights excluded — they stay
/// resident for the life of the model).
std::vector<uint32_t> release_after(const AllocationPlan& plan, int rcb_index);

}  // namespace tilert
