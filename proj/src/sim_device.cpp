// SPDX-FileCopyrightText: (c) 2026 tilert contributors
// SPDX-License-Identifier: Apache-2.0

#include "tilert/sim_device.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>

#include "tilert/errors.hpp"

namespace tilert {

namespace {

constexpr uint32_t align64(uint64_t x) { return static_cast<uint32_t>((x + 63) & ~uint64_t{63}); }

std::string hex(uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "0x%llX", static_cast<unsigned long long>(v));
  return buf;
}

float load_f32(const uint8_t* p) {
  float f;
  std::memcpy(&f, p, 4);
  return f;
}

void store_f32(uint8_t* p, float f) { std::memcpy(p, &f, 4); }

void store_i32(uint8_t* p, int32_t v) { std::memcpy(p, &v, 4); }

}  // namespace

const char* kernel_name(KernelId id) {
  switch (id) {
    case KernelId::Passthrough: return "PASSTHROUGH";
    case KernelId::MatmulI8: return "MATMUL_I8";
    case KernelId::Conv2dF32: return "CONV2D_F32";
    case KernelId::ReluF32: return "RELU_F32";
    case KernelId::SoftmaxF32: return "SOFTMAX_F32";
  }
  return "UNKNOWN";
}

int kernel_param_count(KernelId kernel) {
  switch (kernel) {
    case KernelId::Passthrough: return 1;  // byte length
    case KernelId::MatmulI8: return 3;     // M, K, N
    case KernelId::Conv2dF32: return 4;    // H, W, kH, kW
    case KernelId::ReluF32: return 1;      // element count
    case KernelId::SoftmaxF32: return 1;   // element count
  }
  return 0;
}

KernelLayout kernel_layout(KernelId kernel, std::span<const uint32_t> params) {
  const int want = kernel_param_count(kernel);
  if (want == 0) throw RangeError("unknown kernel id");
  if (params.size() < static_cast<size_t>(want))
    throw RangeError(std::string(kernel_name(kernel)) + ": expected " + std::to_string(want) +
                     " params");
  for (int i = 0; i < want; ++i)
    if (params[i] == 0)
      throw RangeError(std::string(kernel_name(kernel)) + ": param " + std::to_string(i) +
                       " must be > 0");

  KernelLayout layout;
  uint64_t at = 0;
  auto push_input = [&](uint64_t size) {
    layout.inputs.push_back({align64(at), static_cast<uint32_t>(size)});
    at = align64(at) + size;
  };
  auto set_output = [&](uint64_t size, uint64_t elems) {
    layout.output = {align64(at), static_cast<uint32_t>(size)};
    at = align64(at) + size;
    layout.out_elems = static_cast<uint32_t>(elems);
  };

  switch (kernel) {
    case KernelId::Passthrough: {
      const uint64_t n = params[0];
      push_input(n);
      set_output(n, n);
      break;
    }
    case KernelId::MatmulI8: {
      const uint64_t m = params[0], k = params[1], n = params[2];
      push_input(m * k);
      push_input(k * n);
      set_output(m * n * 4, m * n);
      break;
    }
    case KernelId::Conv2dF32: {
      const uint64_t h = params[0], w = params[1], kh = params[2], kw = params[3];
      if (kh > h || kw > w) throw RangeError("CONV2D_F32: kernel larger than input");
      const uint64_t oh = h - kh + 1, ow = w - kw + 1;
      push_input(h * w * 4);
      push_input(kh * kw * 4);
      set_output(oh * ow * 4, oh * ow);
      break;
    }
    case KernelId::ReluF32:
    case KernelId::SoftmaxF32: {
      const uint64_t n = params[0];
      push_input(n * 4);
      set_output(n * 4, n);
      break;
    }
  }
  const uint64_t end = align64(at);
  if (end > (1ull << 31)) throw RangeError("kernel layout exceeds addressable local memory");
  layout.end = static_cast<uint32_t>(end);
  return layout;
}

SimDevice::SimDevice(const SimConfig& cfg) : cfg_(cfg) {
  tiles_.resize(cfg_.grid.tiles());
  for (auto& t : tiles_) t.local.assign(cfg_.local_mem_bytes, 0);
  global_.assign(cfg_.global_mem_bytes, 0);
  if (cfg_.cache_model == CacheModel::StaleUntilFlush) host_view_.assign(cfg_.global_mem_bytes, 0);
}

SimDevice::Tile& SimDevice::tile_at(uint16_t col, uint16_t row) {
  return tiles_[static_cast<size_t>(row) * cfg_.grid.cols + col];
}

const SimDevice::Tile* SimDevice::find_tile(uint64_t addr, uint64_t* offset_out) const {
  const uint64_t region_end = kTileRegionBase + uint64_t{cfg_.grid.tiles()} * kTileStride;
  if (addr < kTileRegionBase || addr >= region_end) return nullptr;
  const uint64_t idx = (addr - kTileRegionBase) / kTileStride;
  *offset_out = (addr - kTileRegionBase) % kTileStride;
  return &tiles_[idx];
}

bool SimDevice::in_global(uint64_t addr, size_t len) const {
  return addr >= kGlobalBase && addr - kGlobalBase <= cfg_.global_mem_bytes &&
         len <= cfg_.global_mem_bytes - (addr - kGlobalBase);
}

bool SimDevice::in_one_tile_local(uint64_t addr, size_t len) const {
  uint64_t off = 0;
  if (find_tile(addr, &off) == nullptr) return false;
  return off >= kTileLocalMemOffset && off - kTileLocalMemOffset <= cfg_.local_mem_bytes &&
         len <= cfg_.local_mem_bytes - (off - kTileLocalMemOffset);
}

std::span<uint8_t> SimDevice::global_range(uint64_t addr, size_t len, bool dma_view) {
  auto& store =
      (cfg_.cache_model == CacheModel::StaleUntilFlush && !dma_view) ? host_view_ : global_;
  return {store.data() + (addr - kGlobalBase), len};
}

std::span<const uint8_t> SimDevice::global_range(uint64_t addr, size_t len, bool dma_view) const {
  const auto& store =
      (cfg_.cache_model == CacheModel::StaleUntilFlush && !dma_view) ? host_view_ : global_;
  return {store.data() + (addr - kGlobalBase), len};
}

std::span<uint8_t> SimDevice::local_range(uint64_t addr, size_t len) {
  uint64_t off = 0;
  auto* t = const_cast<Tile*>(find_tile(addr, &off));
  return {t->local.data() + (off - kTileLocalMemOffset), len};
}

std::span<const uint8_t> SimDevice::tile_local(uint16_t col, uint16_t row) const {
  const auto& t = tiles_[static_cast<size_t>(row) * cfg_.grid.cols + col];
  return {t.local.data(), t.local.size()};
}

void SimDevice::write32(uint64_t addr, uint32_t value) {
  uint64_t off = 0;
  auto* t = const_cast<Tile*>(find_tile(addr, &off));
  if (!t) throw AddressFault(addr, "write32: unmapped address " + hex(addr));
  if (addr % 4 != 0) throw AddressFault(addr, "write32: unaligned address " + hex(addr));

  if (off >= kTileLocalMemOffset) {
    if (off - kTileLocalMemOffset + 4 > cfg_.local_mem_bytes)
      throw AddressFault(addr, "write32: past local memory end " + hex(addr));
    std::memcpy(t->local.data() + (off - kTileLocalMemOffset), &value, 4);
    return;
  }

  const uint32_t tile_index =
      static_cast<uint32_t>((addr - kTileRegionBase) / kTileStride);
  switch (off) {
    case kRegCtrl:
      t->ctrl = value & ~kCtrlStart;  // START self-clears on launch
      if (value & kCtrlStart) launch(*t, tile_index);
      return;
    case kRegStatus:
      return;  // device-owned; host writes are ignored
    case kRegKernelId:
      t->kernel_id = value;
      return;
    default:
      if (off >= kRegParam0 && off < kRegParam0 + 4 * kNumParams) {
        t->params[(off - kRegParam0) / 4] = value;
        return;
      }
      throw AddressFault(addr, "write32: no register at " + hex(addr));
  }
}

uint32_t SimDevice::read32(uint64_t addr) {
  uint64_t off = 0;
  const Tile* t = find_tile(addr, &off);
  if (!t) throw AddressFault(addr, "read32: unmapped address " + hex(addr));
  if (addr % 4 != 0) throw AddressFault(addr, "read32: unaligned address " + hex(addr));

  if (off >= kTileLocalMemOffset) {
    if (off - kTileLocalMemOffset + 4 > cfg_.local_mem_bytes)
      throw AddressFault(addr, "read32: past local memory end " + hex(addr));
    uint32_t v;
    std::memcpy(&v, t->local.data() + (off - kTileLocalMemOffset), 4);
    return v;
  }

  switch (off) {
    case kRegCtrl: return t->ctrl;  // START bit already cleared
    case kRegStatus: return t->status;
    case kRegKernelId: return t->kernel_id;
    default:
      if (off >= kRegParam0 && off < kRegParam0 + 4 * kNumParams)
        return t->params[(off - kRegParam0) / 4];
      throw AddressFault(addr, "read32: no register at " + hex(addr));
  }
}

void SimDevice::write_block(uint64_t addr, const uint8_t* data, size_t len) {
  if (len == 0) return;
  if (in_one_tile_local(addr, len)) {
    auto dst = local_range(addr, len);
    std::memcpy(dst.data(), data, len);
    return;
  }
  // Register-file window: permit word-aligned bursts, replayed as write32 so
  // register side effects (launch, self-clear) still apply.
  uint64_t off = 0;
  if (find_tile(addr, &off) && off < kTileLocalMemOffset && addr % 4 == 0 && len % 4 == 0) {
    for (size_t i = 0; i < len; i += 4) {
      uint32_t v;
      std::memcpy(&v, data + i, 4);
      write32(addr + i, v);
    }
    return;
  }
  throw AddressFault(addr, "write_block: range not within one tile " + hex(addr));
}

void SimDevice::launch(Tile& t, uint32_t tile_index) {
  t.status = 0;
  KernelLayout layout;
  try {
    layout = kernel_layout(static_cast<KernelId>(t.kernel_id), t.params);
  } catch (const Error&) {
    t.status |= kStatusError;
    return;
  }
  if (layout.end > cfg_.local_mem_bytes) {
    t.status |= kStatusError;
    return;
  }

  uint8_t* mem = t.local.data();
  const auto& in = layout.inputs;
  uint8_t* out = mem + layout.output.offset;

  switch (static_cast<KernelId>(t.kernel_id)) {
    case KernelId::Passthrough:
      std::memmove(out, mem + in[0].offset, in[0].size);
      break;
    case KernelId::MatmulI8: {
      const uint32_t m = t.params[0], k = t.params[1], n = t.params[2];
      const int8_t* a = reinterpret_cast<const int8_t*>(mem + in[0].offset);
      const int8_t* b = reinterpret_cast<const int8_t*>(mem + in[1].offset);
      for (uint32_t i = 0; i < m; ++i)
        for (uint32_t j = 0; j < n; ++j) {
          int32_t acc = 0;
          for (uint32_t kk = 0; kk < k; ++kk)
            acc += static_cast<int32_t>(a[i * k + kk]) * static_cast<int32_t>(b[kk * n + j]);
          store_i32(out + (i * n + j) * 4, acc);
        }
      break;
    }
    case KernelId::Conv2dF32: {
      const uint32_t h = t.params[0], w = t.params[1], kh = t.params[2], kw = t.params[3];
      const uint32_t oh = h - kh + 1, ow = w - kw + 1;
      const uint8_t* src = mem + in[0].offset;
      const uint8_t* ker = mem + in[1].offset;
      for (uint32_t i = 0; i < oh; ++i)
        for (uint32_t j = 0; j < ow; ++j) {
          float acc = 0.0f;
          for (uint32_t a = 0; a < kh; ++a)
            for (uint32_t b = 0; b < kw; ++b)
              acc += load_f32(src + ((i + a) * w + (j + b)) * 4) * load_f32(ker + (a * kw + b) * 4);
          store_f32(out + (i * ow + j) * 4, acc);
        }
      break;
    }
    case KernelId::ReluF32: {
      const uint32_t n = t.params[0];
      const uint8_t* src = mem + in[0].offset;
      for (uint32_t i = 0; i < n; ++i) {
        const float v = load_f32(src + i * 4);
        store_f32(out + i * 4, v > 0.0f ? v : 0.0f);
      }
      break;
    }
    case KernelId::SoftmaxF32: {
      const uint32_t n = t.params[0];
      const uint8_t* src = mem + in[0].offset;
      float mx = load_f32(src);
      for (uint32_t i = 1; i < n; ++i) mx = std::max(mx, load_f32(src + i * 4));
      double sum = 0.0;
      for (uint32_t i = 0; i < n; ++i) {
        const float e = std::exp(load_f32(src + i * 4) - mx);
        store_f32(out + i * 4, e);
        sum += e;
      }
      for (uint32_t i = 0; i < n; ++i)
        store_f32(out + i * 4, static_cast<float>(load_f32(out + i * 4) / sum));
      break;
    }
    default:
      t.status |= kStatusError;  // unreachable: kernel_layout rejected it
      return;
  }

  const uint32_t cost =
      std::max<uint32_t>(1, (layout.out_elems + cfg_.kernel_elems_per_tick - 1) /
                                cfg_.kernel_elems_per_tick);
  clock_ += cost;
  t.status |= kStatusDone;
  events_.push_back({tile_index + 1, static_cast<uint16_t>(tile_index % cfg_.grid.cols),
                     static_cast<uint16_t>(tile_index / cfg_.grid.cols)});
}

DmaHandle SimDevice::initiate_dma(const DmaRequest& req) {
  if (req.length == 0) throw DmaFault("DMA length must be > 0");

  if (req.direction == DmaDir::ToDevice) {
    if (!in_global(req.src, req.length))
      throw DmaFault("TO_DEVICE source not within global memory: " + hex(req.src));
    if (!in_one_tile_local(req.dst, req.length))
      throw DmaFault("TO_DEVICE destination not within one tile's local memory: " + hex(req.dst));
    auto src = global_range(req.src, req.length, /*dma_view=*/true);
    auto dst = local_range(req.dst, req.length);
    std::memcpy(dst.data(), src.data(), req.length);
  } else {
    if (!in_one_tile_local(req.src, req.length))
      throw DmaFault("FROM_DEVICE source not within one tile's local memory: " + hex(req.src));
    if (!in_global(req.dst, req.length))
      throw DmaFault("FROM_DEVICE destination not within global memory: " + hex(req.dst));
    auto src = local_range(req.src, req.length);
    auto dst = global_range(req.dst, req.length, /*dma_view=*/true);
    std::memcpy(dst.data(), src.data(), req.length);
  }

  clock_ += cfg_.dma_setup_cost +
            (req.length + cfg_.dma_bytes_per_tick - 1) / cfg_.dma_bytes_per_tick;
  const DmaHandle h = next_handle_++;
  outstanding_.push_back(h);
  return h;
}

void SimDevice::wait_dma(DmaHandle handle) {
  auto it = std::find(outstanding_.begin(), outstanding_.end(), handle);
  if (it == outstanding_.end())
    throw HandleFault(handle, "wait_dma: unknown handle " + std::to_string(handle));
  outstanding_.erase(it);
}

bool SimDevice::poll_register_masked(uint64_t addr, uint32_t mask, uint32_t expected,
                                     uint32_t timeout_us) {
  const uint64_t deadline = clock_ + timeout_us;
  while (true) {
    const uint32_t v = read32(addr);  // faults propagate before any clock charge
    clock_ += 1;                      // one tick per sample
    if ((v & mask) == expected) return true;
    if (clock_ >= deadline) return false;
  }
}

void SimDevice::flush_cache(uint64_t addr, size_t len) {
  if (!in_global(addr, len))
    throw AddressFault(addr, "flush_cache: range not within global memory " + hex(addr));
  if (cfg_.cache_model == CacheModel::Off || len == 0) return;
  std::memcpy(global_.data() + (addr - kGlobalBase), host_view_.data() + (addr - kGlobalBase),
              len);
}

void SimDevice::invalidate_cache(uint64_t addr, size_t len) {
  if (!in_global(addr, len))
    throw AddressFault(addr, "invalidate_cache: range not within global memory " + hex(addr));
  if (cfg_.cache_model == CacheModel::Off || len == 0) return;
  std::memcpy(host_view_.data() + (addr - kGlobalBase), global_.data() + (addr - kGlobalBase),
              len);
}

void SimDevice::host_write(uint64_t addr, std::span<const uint8_t> data) {
  if (!in_global(addr, data.size()))
    throw AddressFault(addr, "host_write: range not within global memory " + hex(addr));
  if (data.empty()) return;
  auto dst = global_range(addr, data.size(), /*dma_view=*/false);
  std::memcpy(dst.data(), data.data(), data.size());
}

void SimDevice::host_read(uint64_t addr, std::span<uint8_t> out) const {
  if (!in_global(addr, out.size()))
    throw AddressFault(addr, "host_read: range not within global memory " + hex(addr));
  if (out.empty()) return;
  auto src = global_range(addr, out.size(), /*dma_view=*/false);
  std::memcpy(out.data(), src.data(), out.size());
}

bool SimDevice::pop_event(CompletionEvent& out) {
  if (events_.empty()) return false;
  out = events_.front();
  events_.pop_front();
  return true;
}

}  // namespace tilert
