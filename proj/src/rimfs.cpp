// SPDX-FileCopyrightText: (c) 2026 tilert contributors
// SPDX-License-Identifier: Apache-2.0

#include "tilert/rimfs.hpp"

#include <algorithm>
#include <unordered_set>

#include "tilert/bytes.hpp"

namespace tilert {

namespace {

uint64_t g_bytes_copied = 0;

uint64_t align_up(uint64_t x, uint64_t a) { return (x + a - 1) / a * a; }

}  // namespace

uint64_t rimfs_bytes_copied() { return g_bytes_copied; }

std::vector<uint8_t> build_image(const std::vector<FilePayload>& files, uint32_t alignment) {
  if (alignment == 0 || (alignment & (alignment - 1)) != 0)
    throw BuildError("alignment must be a power of two");

  std::unordered_set<uint32_t> ids;
  for (const auto& [id, payload] : files) {
    (void)payload;
    if (!ids.insert(id).second)
      throw BuildError("duplicate file id " + std::to_string(id));
  }

  const uint64_t table_end = 16 + 12ull * files.size();
  uint64_t offset = align_up(table_end, alignment);

  ByteWriter w;
  w.u32(kRimfsMagic);
  w.u16(kRimfsVersion);
  w.u16(0);
  w.u32(static_cast<uint32_t>(files.size()));
  w.u32(alignment);
  for (const auto& [id, payload] : files) {
    if (offset + payload.size() > UINT32_MAX)
      throw BuildError("image exceeds 4 GiB offset space");
    w.u32(id);
    w.u32(static_cast<uint32_t>(offset));
    w.u32(static_cast<uint32_t>(payload.size()));
    offset = align_up(offset + payload.size(), alignment);
  }
  w.pad_to(alignment);
  for (const auto& [id, payload] : files) {
    (void)id;
    w.bytes(payload.data(), payload.size());
    w.pad_to(alignment);
  }
  return w.take();
}

RimfsImage RimfsImage::mount(std::span<const uint8_t> buf, uint64_t base) {
  if (buf.size() < 16) throw MountError("image shorter than header");
  RimfsImage img;
  try {
    ByteReader r(buf);
    if (r.u32() != kRimfsMagic) throw MountError("bad image magic");
    const uint16_t version = r.u16();
    if (version != kRimfsVersion)
      throw MountError("unsupported image version " + std::to_string(version));
    r.skip(2);
    const uint32_t count = r.u32();
    img.alignment_ = r.u32();
    if (img.alignment_ == 0 || (img.alignment_ & (img.alignment_ - 1)) != 0)
      throw MountError("bad image alignment");

    img.entries_.reserve(count);
    for (uint32_t i = 0; i < count; ++i) {
      RimfsEntry e;
      e.file_id = r.u32();
      e.offset = r.u32();
      e.size = r.u32();
      if (e.offset % img.alignment_ != 0)
        throw MountError("entry " + std::to_string(i) + ": unaligned offset");
      if (uint64_t{e.offset} + e.size > buf.size())
        throw MountError("entry " + std::to_string(i) + ": extends past image end");
      if (!img.table_.emplace(e.file_id, img.entries_.size()).second)
        throw MountError("entry " + std::to_string(i) + ": duplicate file id");
      img.entries_.push_back(e);
    }
  } catch (const FormatError& e) {
    throw MountError(std::string("truncated table: ") + e.what());
  }
  img.base_ = base;
  img.buf_ = buf;
  return img;
}

RimfsImage::Handle RimfsImage::lookup(uint32_t file_id) const {
  auto it = table_.find(file_id);
  if (it == table_.end()) throw NotFound(file_id);
  const RimfsEntry& e = entries_[it->second];
  return {base_ + e.offset, e.size};
}

std::vector<uint8_t> RimfsImage::read_payload(uint32_t file_id) const {
  auto it = table_.find(file_id);
  if (it == table_.end()) throw NotFound(file_id);
  const RimfsEntry& e = entries_[it->second];
  g_bytes_copied += e.size;
  return {buf_.begin() + e.offset, buf_.begin() + e.offset + e.size};
}

// ---- arena ----

const char* stage_name(Stage s) {
  switch (s) {
    case Stage::Free: return "FREE";
    case Stage::Receive: return "RECEIVE";
    case Stage::Compute: return "COMPUTE";
    case Stage::Send: return "SEND";
  }
  return "?";
}

Arena::Arena(uint64_t base, uint64_t size) : base_(base), size_(size) {
  free_.push_back({base, size});
}

Region Arena::alloc(uint32_t size, uint32_t alignment) {
  if (size == 0) throw OutOfMemory("alloc of zero bytes");
  if (alignment == 0 || (alignment & (alignment - 1)) != 0)
    throw OutOfMemory("alignment must be a power of two");

  for (size_t i = 0; i < free_.size(); ++i) {
    const uint64_t aligned = align_up(free_[i].addr, alignment);
    const uint64_t end = free_[i].addr + free_[i].size;
    if (aligned + size > end) continue;

    // Carve [aligned, aligned+size) out; front and tail fragments stay free.
    const FreeBlock block = free_[i];
    free_.erase(free_.begin() + i);
    if (aligned > block.addr) insert_free(block.addr, aligned - block.addr);
    if (aligned + size < end) insert_free(aligned + size, end - (aligned + size));

    live_.emplace(aligned, size);
    live_bytes_ += size;
    Region r;
    r.address = aligned;
    r.size = size;
    r.alignment = alignment;
    r.stage = Stage::Free;
    r.id = next_id_++;
    return r;
  }
  throw OutOfMemory("arena exhausted: no block fits " + std::to_string(size) + " bytes @" +
                    std::to_string(alignment));
}

void Arena::advance(Region& region, Stage to) {
  const auto succ = [](Stage s) {
    switch (s) {
      case Stage::Free: return Stage::Receive;
      case Stage::Receive: return Stage::Compute;
      case Stage::Compute: return Stage::Send;
      case Stage::Send: return Stage::Free;
    }
    return Stage::Free;
  };
  if (to != succ(region.stage))
    throw StageError(std::string("illegal stage transition ") + stage_name(region.stage) +
                     " -> " + stage_name(to));
  region.stage = to;
}

void Arena::release(Region& region) {
  auto it = live_.find(region.address);
  if (it == live_.end() || it->second != region.size)
    throw StageError("release of a region not live in this arena");
  live_bytes_ -= it->second;
  insert_free(it->first, it->second);
  live_.erase(it);
  region.stage = Stage::Free;
}

void Arena::insert_free(uint64_t addr, uint64_t size) {
  auto it = std::lower_bound(free_.begin(), free_.end(), addr,
                             [](const FreeBlock& b, uint64_t a) { return b.addr < a; });
  it = free_.insert(it, {addr, size});
  // Coalesce with the next block, then with the previous.
  if (it + 1 != free_.end() && it->addr + it->size == (it + 1)->addr) {
    it->size += (it + 1)->size;
    free_.erase(it + 1);
  }
  if (it != free_.begin() && (it - 1)->addr + (it - 1)->size == it->addr) {
    (it - 1)->size += it->size;
    free_.erase(it);
  }
}

}  // namespace tilert
