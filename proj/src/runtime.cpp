// SPDX-FileCopyrightText: (c) 2026 tilert contributors
// SPDX-License-Identifier: Apache-2.0

#include "tilert/runtime.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

namespace tilert {

namespace {

std::string id_str(uint32_t id) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "0x%08x", id);
  return buf;
}

uint64_t align_up64(uint64_t v, uint64_t a) { return (v + a - 1) & ~(a - 1); }

}  // namespace

RuntimeSession::RuntimeSession(const SimConfig& cfg) : cfg_(cfg), dev_(cfg) {}

void RuntimeSession::load_image(std::span<const uint8_t> image) {
  if (image.size() > cfg_.global_mem_bytes)
    throw OutOfMemory("image (" + std::to_string(image.size()) +
                      " bytes) exceeds global memory");

  image_bytes_.assign(image.begin(), image.end());
  RimfsImage mounted = RimfsImage::mount(image_bytes_, kGlobalBase);

  dev_.host_write(kGlobalBase, image_bytes_);
  // The image is DMA-read (weight stages); make the device view current.
  dev_.flush_cache(kGlobalBase, image_bytes_.size());

  image_ = std::move(mounted);
  const uint64_t end = kGlobalBase + cfg_.global_mem_bytes;
  const uint64_t base = align_up64(kGlobalBase + image_bytes_.size(), kRimfsDefaultAlign);
  arena_.emplace(base, end > base ? end - base : 0);

  // A plan binds against a specific image; a new image voids it.
  plan_loaded_ = false;
  rcbs_.clear();
  manifest_ = {};
  plan_ = {};
  weight_bindings_.clear();
}

void RuntimeSession::load_plan(const std::vector<std::vector<uint8_t>>& rcbs,
                               const ModelManifest& manifest) {
  if (!image_)
    throw ServiceError(static_cast<uint32_t>(NackCode::NotProvisioned),
                       "load_plan before load_image: no weight image mounted");

  std::vector<Rcb> decoded;
  decoded.reserve(rcbs.size());
  for (const auto& bytes : rcbs) decoded.push_back(decode_rcb(bytes));

  AllocationPlan plan = plan_buffers(decoded, manifest.buffers);

  // Every wire-visible tensor must actually be touched by the pipeline.
  for (uint32_t id : manifest.inputs)
    if (!plan.find(id)) throw PlanError("manifest input " + id_str(id) + " is never referenced");
  for (uint32_t id : manifest.outputs)
    if (!plan.find(id)) throw PlanError("manifest output " + id_str(id) + " is never referenced");

  BindingTable weights;
  for (const BufferPlan& buf : plan.buffers) {
    if (buf.spec.cls != BufferClass::Weight) continue;
    const RimfsImage::Handle h = image_->lookup(buf.buffer_id);  // NotFound propagates
    if (h.size != buf.spec.size)
      throw PlanError("weight " + id_str(buf.buffer_id) + " is " + std::to_string(h.size) +
                      " bytes in the image, manifest says " + std::to_string(buf.spec.size));
    weights.bind(buf.buffer_id, {Binding::Source::RimfsFile, h.address, h.size});
  }

  rcbs_ = std::move(decoded);
  manifest_ = manifest;
  plan_ = std::move(plan);
  weight_bindings_ = std::move(weights);
  plan_loaded_ = true;
}

std::vector<uint8_t> RuntimeSession::run(std::span<const uint8_t> input) {
  if (!provisioned())
    throw ServiceError(static_cast<uint32_t>(NackCode::NotProvisioned),
                       "run before provisioning");
  if (input.size() != manifest_.input_bytes())
    throw RangeError("RUN payload is " + std::to_string(input.size()) +
                     " bytes, the model takes " + std::to_string(manifest_.input_bytes()));

  // One region covers the whole activation plan; the planner's offsets are
  // region-relative, so every run binds to identical absolute addresses
  // (the arena is empty between runs) and traces replay tick-for-tick.
  // Plans with no runtime buffers still cycle one minimal region so the
  // receive/compute/send bookkeeping stays uniform.
  Region region = arena_->alloc(
      static_cast<uint32_t>(std::max<uint64_t>(plan_.arena_bytes_required, 64)), 64);
  arena_->advance(region, Stage::Receive);

  BindingTable table = weight_bindings_;
  for (const BufferPlan& buf : plan_.buffers) {
    if (!buf.offset) continue;
    table.bind(buf.buffer_id,
               {Binding::Source::RuntimeRegion, region.address + *buf.offset, buf.spec.size});
  }

  size_t cursor = 0;
  for (uint32_t id : manifest_.inputs) {
    const Binding* b = table.find(id);
    dev_.host_write(b->address, input.subspan(cursor, b->size));
    dev_.flush_cache(b->address, b->size);
    cursor += b->size;
  }
  arena_->advance(region, Stage::Compute);

  std::vector<Rcb> bound;
  bound.reserve(rcbs_.size());
  for (const Rcb& rcb : rcbs_) bound.push_back(bind(rcb, table, cfg_.grid));

  PipelineResult result;
  try {
    result = execute_pipeline(bound, plan_, region.address, dev_, dev_, &dev_);
  } catch (const ExecError& e) {
    tel_.last_error = static_cast<uint32_t>(NackCode::ExecFailed);
    traces_.assign(1, e.partial);
    arena_->release(region);
    throw;
  }

  arena_->advance(region, Stage::Send);
  std::map<uint32_t, const std::vector<uint8_t>*> by_id;
  for (const auto& [id, payload] : result.outputs) by_id[id] = &payload;
  std::vector<uint8_t> out;
  out.reserve(manifest_.output_bytes());
  for (uint32_t id : manifest_.outputs) {
    const std::vector<uint8_t>& payload = *by_id.at(id);
    out.insert(out.end(), payload.begin(), payload.end());
  }
  arena_->release(region);

  traces_ = std::move(result.traces);
  for (const ExecTrace& t : traces_)
    for (int s = 0; s < 3; ++s) tel_.stage_ticks[s] += t.stage_ticks[s];
  tel_.inferences += 1;
  tel_.last_error = 0;
  return out;
}

}  // namespace tilert
