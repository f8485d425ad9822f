// SPDX-FileCopyrightText: (c) 2026 tilert contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tilert/binding.hpp"
#include "tilert/graph.hpp"

namespace tilert {

// A deployable model: encoded RCBs in topological order, the weight image,
// the buffer manifest, and the node placement. On disk this is a directory:
//
//   model.rimfs      weight image
//   000.rcb ...      one encoded block per graph node, pipeline order
//   manifest.json    buffers + input/output tensor id order
//   placement.json   node -> tile assignments
//
// The RUN payload convention follows the manifest: input tensors arrive
// concatenated in manifest-input order; results return concatenated in
// manifest-output order.

/// Buffer manifest plus the I/O ordering the wire protocol relies on.
struct ModelManifest {
  Manifest buffers;               // tensor id -> physical requirements
  std::vector<uint32_t> inputs;   // Input-class ids, RUN payload order
  std::vector<uint32_t> outputs;  // Output-class ids, RESULT payload order

  uint64_t input_bytes() const;
  uint64_t output_bytes() const;

  std::string to_json() const;
  static ModelManifest from_json(const std::string& text);  // throws ConfigError

  bool operator==(const ModelManifest&) const = default;
};

struct PlacementEntry {
  std::string node;
  uint16_t col = 0;
  uint16_t row = 0;
  uint32_t rcb = 0;  // pipeline index of the node's block
  bool operator==(const PlacementEntry&) const = default;
};

struct CompiledModel {
  std::vector<std::vector<uint8_t>> rcbs;  // encoded, pipeline order
  std::vector<uint8_t> image;              // rimfs weight image
  ModelManifest manifest;
  std::vector<PlacementEntry> placement;

  bool operator==(const CompiledModel&) const = default;
};

std::string placement_to_json(const std::vector<PlacementEntry>& placement);
std::vector<PlacementEntry> placement_from_json(const std::string& text);

/// Writes the directory layout above (creating the directory if needed).
void save_model(const CompiledModel& model, const std::string& dir);

/// Reads a packed model back. Throws ConfigError on a missing or malformed
/// directory.
CompiledModel load_model(const std::string& dir);

}  // namespace tilert
