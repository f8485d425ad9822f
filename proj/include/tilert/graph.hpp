// SPDX-FileCopyrightText: (c) 2026 tilert contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tilert/device_map.hpp"
#include "tilert/errors.hpp"

namespace tilert {

// Dataflow-graph IR: kernels connected by streams. Parsed from a JSON
// document:
//
//   {"nodes":  [{"name":"mm", "kernel":"MATMUL_I8", "params":[64,64,64],
//                "weights":{"b": 1}}],
//    "edges":  [{"from":"a", "to":"mm:a", "shape":[64,64], "dtype":"i8"}],
//    "inputs": ["a"],
//    "outputs":["mm:out"]}
//
// Edge endpoints are "node:port", or a bare graph-input name on the "from"
// side. Every node has one output port, "out". Input ports are per kernel:
// PASSTHROUGH/RELU_F32/SOFTMAX_F32 take ["in"], MATMUL_I8 ["a","b"],
// CONV2D_F32 ["in","k"]. A port fed by a weight file must not also have an
// incoming edge.

enum class DType : uint8_t { I8, I32, F32 };

const char* dtype_name(DType t);
uint32_t dtype_size(DType t);

struct EdgeIr {
  std::string from_node;  // producer node name, or empty for a graph input
  std::string from_input; // graph-input name when from_node is empty
  std::string to_node;
  std::string to_port;
  std::vector<uint32_t> shape;
  DType dtype = DType::F32;

  uint64_t elems() const {
    uint64_t n = 1;
    for (uint32_t d : shape) n *= d;
    return n;
  }
  uint64_t bytes() const { return elems() * dtype_size(dtype); }
};

struct NodeIr {
  std::string name;
  KernelId kernel = KernelId::Passthrough;
  std::vector<uint32_t> params;
  std::map<std::string, uint32_t> weights;  // input port -> rimfs file id
};

struct GraphIr {
  std::vector<NodeIr> nodes;
  std::vector<EdgeIr> edges;
  std::vector<std::string> inputs;   // graph input tensor names
  std::vector<std::string> outputs;  // "node:out" entries

  int node_index(const std::string& name) const;  // -1 if absent
};

/// Input port names of a kernel, in the tile-local layout order.
std::vector<std::string> kernel_input_ports(KernelId k);

/// Expected byte size of each input port and of the output, derived from
/// the node's params via the same tile-buffer layout the simulator's
/// kernels use (matmul a: M*K i8, b: K*N i8, out: M*N i32; conv in: H*W,
/// k: kH*kW, out: (H-kH+1)*(W-kW+1), all f32; elementwise: identity).
/// A nullopt dtype means any element type of the right total size is
/// accepted (PASSTHROUGH moves bytes).
struct NodeShape {
  std::vector<uint64_t> input_bytes;
  std::vector<std::optional<DType>> input_dtypes;
  uint64_t output_bytes = 0;
  std::optional<DType> output_dtype;
};

/// Throws GraphError(Shape) on malformed params (wrong arity, zero dims,
/// kernel window larger than the image).
NodeShape node_shape(KernelId k, std::span<const uint32_t> params);

/// Parses and validates: known kernels/ports, param arity, single producer
/// per port, acyclicity, edge shapes consistent with node params.
GraphIr parse_graph(const std::string& text);

/// Node indices in a deterministic topological order (Kahn's algorithm,
/// ties broken by declaration order). Throws GraphError(Cycle).
std::vector<int> topo_order(const GraphIr& g);

struct TilePlacement {
  uint16_t col = 0;
  uint16_t row = 0;

  bool operator==(const TilePlacement&) const = default;
};

/// node index -> tile, round-robin in topological order:
/// i-th node -> (i mod cols, i div cols). Throws PlaceError when the graph
/// has more nodes than the grid has tiles.
std::map<int, TilePlacement> place(const GraphIr& g, const GridConfig& grid);

}  // namespace tilert
