// SPDX-FileCopyrightText: (c) 2026 tilert contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tilert/binding.hpp"
#include "tilert/executor.hpp"
#include "tilert/frame.hpp"
#include "tilert/model.hpp"
#include "tilert/rimfs.hpp"
#include "tilert/sim_device.hpp"

namespace tilert {

/// One provisioned device: a weight image mounted in global memory, a plan
/// (decoded RCBs + manifest) bound against it, and an activation arena in
/// the global memory left over after the image. Drives the full inference
/// path the wire protocol and the CLI share.
class RuntimeSession {
 public:
  explicit RuntimeSession(const SimConfig& cfg = {});

  /// Copies the weight image into global memory at the image base, flushes
  /// it (the DMA engine reads weights from the coherent view), and mounts
  /// the table in place. Invalidates any previously loaded plan.
  void load_image(std::span<const uint8_t> image);

  /// Decodes the blocks, derives buffer lifetimes, and binds every weight
  /// ref against the mounted image. Requires load_image first.
  void load_plan(const std::vector<std::vector<uint8_t>>& rcbs, const ModelManifest& manifest);

  bool image_loaded() const { return image_.has_value(); }
  bool provisioned() const { return image_.has_value() && plan_loaded_; }

  /// One inference. `input` is the Input-class tensors concatenated in
  /// manifest order; the result is the Output-class tensors concatenated in
  /// manifest order. Throws RangeError on a payload size mismatch and
  /// ExecError when the pipeline halts; telemetry records the failure.
  std::vector<uint8_t> run(std::span<const uint8_t> input);

  const Telemetry& telemetry() const { return tel_; }
  /// Records a failure code (a NackCode) in telemetry; the wire service
  /// calls this for protocol-level rejections the session never sees.
  void note_error(uint32_t code) { tel_.last_error = code; }
  const std::vector<ExecTrace>& last_traces() const { return traces_; }
  const ModelManifest& manifest() const { return manifest_; }
  const AllocationPlan& plan() const { return plan_; }
  const std::vector<Rcb>& rcbs() const { return rcbs_; }
  SimDevice& device() { return dev_; }
  uint64_t arena_base() const { return arena_ ? arena_->base() : 0; }

 private:
  SimConfig cfg_;
  SimDevice dev_;
  std::vector<uint8_t> image_bytes_;  // host copy the mount's table spans
  std::optional<RimfsImage> image_;
  std::optional<Arena> arena_;
  std::vector<Rcb> rcbs_;
  ModelManifest manifest_;
  AllocationPlan plan_;
  BindingTable weight_bindings_;
  bool plan_loaded_ = false;
  Telemetry tel_{};
  std::vector<ExecTrace> traces_;
};

}  // namespace tilert
