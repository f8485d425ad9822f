// SPDX-FileCopyrightText: (c) 2026 tilert contributors
// SPDX-License-Identifier: Apache-2.0

#include "tilert/graph.hpp"

#include <algorithm>
#include <set>

#include "json.hpp"

#include "tilert/sim_device.hpp"

namespace tilert {

using json = nlohmann::json;

const char* dtype_name(DType t) {
  switch (t) {
    case DType::I8: return "i8";
    case DType::I32: return "i32";
    case DType::F32: return "f32";
  }
  return "?";
}

uint32_t dtype_size(DType t) {
  switch (t) {
    case DType::I8: return 1;
    case DType::I32: return 4;
    case DType::F32: return 4;
  }
  return 0;
}

namespace {

DType parse_dtype(const std::string& s) {
  if (s == "i8") return DType::I8;
  if (s == "i32") return DType::I32;
  if (s == "f32") return DType::F32;
  throw GraphError(GraphError::Kind::Parse, "unknown dtype \"" + s + "\"");
}

KernelId parse_kernel(const std::string& s) {
  if (s == "PASSTHROUGH") return KernelId::Passthrough;
  if (s == "MATMUL_I8") return KernelId::MatmulI8;
  if (s == "CONV2D_F32") return KernelId::Conv2dF32;
  if (s == "RELU_F32") return KernelId::ReluF32;
  if (s == "SOFTMAX_F32") return KernelId::SoftmaxF32;
  throw GraphError(GraphError::Kind::Kernel, "unknown kernel \"" + s + "\"");
}

/// Splits "node:port"; a bare name returns {name, ""}.
std::pair<std::string, std::string> split_ref(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) return {s, ""};
  return {s.substr(0, colon), s.substr(colon + 1)};
}

}  // namespace

int GraphIr::node_index(const std::string& name) const {
  for (size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].name == name) return static_cast<int>(i);
  return -1;
}

std::vector<std::string> kernel_input_ports(KernelId k) {
  switch (k) {
    case KernelId::Passthrough:
    case KernelId::ReluF32:
    case KernelId::SoftmaxF32:
      return {"in"};
    case KernelId::MatmulI8:
      return {"a", "b"};
    case KernelId::Conv2dF32:
      return {"in", "k"};
  }
  return {};
}

NodeShape node_shape(KernelId k, std::span<const uint32_t> params) {
  KernelLayout layout;
  try {
    layout = kernel_layout(k, params);
  } catch (const RangeError& e) {
    throw GraphError(GraphError::Kind::Shape, e.what());
  }

  NodeShape shape;
  for (const auto& in : layout.inputs) shape.input_bytes.push_back(in.size);
  shape.output_bytes = layout.output.size;
  switch (k) {
    case KernelId::Passthrough:
      shape.input_dtypes = {std::nullopt};
      shape.output_dtype = std::nullopt;
      break;
    case KernelId::MatmulI8:
      shape.input_dtypes = {DType::I8, DType::I8};
      shape.output_dtype = DType::I32;
      break;
    case KernelId::Conv2dF32:
      shape.input_dtypes = {DType::F32, DType::F32};
      shape.output_dtype = DType::F32;
      break;
    case KernelId::ReluF32:
    case KernelId::SoftmaxF32:
      shape.input_dtypes = {DType::F32};
      shape.output_dtype = DType::F32;
      break;
  }
  return shape;
}

GraphIr parse_graph(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw GraphError(GraphError::Kind::Parse, std::string("graph is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("nodes") || !doc.contains("edges") ||
      !doc.contains("inputs") || !doc.contains("outputs"))
    throw GraphError(GraphError::Kind::Parse,
                     "graph document needs nodes, edges, inputs and outputs");

  GraphIr g;
  try {
    for (const auto& jn : doc.at("nodes")) {
      NodeIr n;
      n.name = jn.at("name").get<std::string>();
      if (n.name.empty() || n.name.find(':') != std::string::npos)
        throw GraphError(GraphError::Kind::Parse, "bad node name \"" + n.name + "\"");
      if (g.node_index(n.name) >= 0)
        throw GraphError(GraphError::Kind::Duplicate, "duplicate node \"" + n.name + "\"");
      n.kernel = parse_kernel(jn.at("kernel").get<std::string>());
      for (const auto& p : jn.at("params")) n.params.push_back(p.get<uint32_t>());
      if (n.params.size() != static_cast<size_t>(kernel_param_count(n.kernel)))
        throw GraphError(GraphError::Kind::Parse,
                         n.name + ": " + std::string(kernel_name(n.kernel)) + " takes " +
                             std::to_string(kernel_param_count(n.kernel)) + " params, got " +
                             std::to_string(n.params.size()));
      if (jn.contains("weights")) {
        const auto ports = kernel_input_ports(n.kernel);
        for (const auto& [port, jid] : jn.at("weights").items()) {
          if (std::find(ports.begin(), ports.end(), port) == ports.end())
            throw GraphError(GraphError::Kind::Port,
                             n.name + ": no input port \"" + port + "\"");
          const uint32_t id = jid.get<uint32_t>();
          if (id >= 0x0100'0000)
            throw GraphError(GraphError::Kind::Id,
                             n.name + ": weight file id " + std::to_string(id) +
                                 " collides with the runtime tensor-id range");
          n.weights[port] = id;
        }
      }
      g.nodes.push_back(std::move(n));
    }

    for (const auto& ji : doc.at("inputs")) {
      const auto name = ji.get<std::string>();
      if (std::find(g.inputs.begin(), g.inputs.end(), name) != g.inputs.end())
        throw GraphError(GraphError::Kind::Duplicate, "duplicate graph input \"" + name + "\"");
      if (g.node_index(name) >= 0)
        throw GraphError(GraphError::Kind::Duplicate,
                         "graph input \"" + name + "\" shadows a node name");
      g.inputs.push_back(name);
    }

    for (const auto& je : doc.at("edges")) {
      EdgeIr e;
      const auto [from_name, from_port] = split_ref(je.at("from").get<std::string>());
      if (from_port.empty()) {
        if (std::find(g.inputs.begin(), g.inputs.end(), from_name) == g.inputs.end())
          throw GraphError(GraphError::Kind::Id,
                           "edge from unknown graph input \"" + from_name + "\"");
        e.from_input = from_name;
      } else {
        if (from_port != "out")
          throw GraphError(GraphError::Kind::Port,
                           "edges originate at \"" + from_name + ":out\", not :" + from_port);
        if (g.node_index(from_name) < 0)
          throw GraphError(GraphError::Kind::Id, "edge from unknown node \"" + from_name + "\"");
        e.from_node = from_name;
      }
      const auto [to_name, to_port] = split_ref(je.at("to").get<std::string>());
      const int ti = g.node_index(to_name);
      if (ti < 0)
        throw GraphError(GraphError::Kind::Id, "edge into unknown node \"" + to_name + "\"");
      const auto ports = kernel_input_ports(g.nodes[ti].kernel);
      if (std::find(ports.begin(), ports.end(), to_port) == ports.end())
        throw GraphError(GraphError::Kind::Port,
                         to_name + ": no input port \"" + to_port + "\"");
      e.to_node = to_name;
      e.to_port = to_port;
      for (const auto& d : je.at("shape")) {
        e.shape.push_back(d.get<uint32_t>());
        if (e.shape.back() == 0)
          throw GraphError(GraphError::Kind::Shape, "zero dimension in edge shape");
      }
      if (e.shape.empty()) throw GraphError(GraphError::Kind::Shape, "empty edge shape");
      e.dtype = parse_dtype(je.at("dtype").get<std::string>());
      g.edges.push_back(std::move(e));
    }

    for (const auto& jo : doc.at("outputs")) {
      const auto ref = jo.get<std::string>();
      const auto [name, port] = split_ref(ref);
      if (port != "out" || g.node_index(name) < 0)
        throw GraphError(GraphError::Kind::Id, "graph output \"" + ref + "\" is not a node:out");
      if (std::find(g.outputs.begin(), g.outputs.end(), ref) != g.outputs.end())
        throw GraphError(GraphError::Kind::Duplicate, "duplicate graph output \"" + ref + "\"");
      g.outputs.push_back(ref);
    }
  } catch (const json::exception& e) {
    throw GraphError(GraphError::Kind::Parse, std::string("malformed graph field: ") + e.what());
  }

  // One producer per input port: an edge or a weight, never both or neither.
  for (const auto& n : g.nodes) {
    const auto ports = kernel_input_ports(n.kernel);
    for (const auto& port : ports) {
      int feeds = n.weights.count(port) ? 1 : 0;
      for (const auto& e : g.edges)
        if (e.to_node == n.name && e.to_port == port) ++feeds;
      if (feeds == 0)
        throw GraphError(GraphError::Kind::Port, n.name + ":" + port + " has no producer");
      if (feeds > 1)
        throw GraphError(GraphError::Kind::Duplicate,
                         n.name + ":" + port + " has multiple producers");
    }
  }

  // Shape discipline, both ends of every edge.
  for (const auto& e : g.edges) {
    const int ti = g.node_index(e.to_node);
    const auto& consumer = g.nodes[ti];
    const auto ports = kernel_input_ports(consumer.kernel);
    const auto shape = node_shape(consumer.kernel, consumer.params);
    const size_t pi = std::find(ports.begin(), ports.end(), e.to_port) - ports.begin();
    if (e.bytes() != shape.input_bytes[pi])
      throw GraphError(GraphError::Kind::Shape,
                       e.to_node + ":" + e.to_port + " expects " +
                           std::to_string(shape.input_bytes[pi]) + " bytes, edge carries " +
                           std::to_string(e.bytes()));
    if (shape.input_dtypes[pi] && e.dtype != *shape.input_dtypes[pi])
      throw GraphError(GraphError::Kind::Shape,
                       e.to_node + ":" + e.to_port + " expects dtype " +
                           dtype_name(*shape.input_dtypes[pi]) + ", edge carries " +
                           dtype_name(e.dtype));
    if (!e.from_node.empty()) {
      const auto& producer = g.nodes[g.node_index(e.from_node)];
      const auto pshape = node_shape(producer.kernel, producer.params);
      if (e.bytes() != pshape.output_bytes)
        throw GraphError(GraphError::Kind::Shape,
                         e.from_node + ":out produces " + std::to_string(pshape.output_bytes) +
                             " bytes, edge carries " + std::to_string(e.bytes()));
      if (pshape.output_dtype && e.dtype != *pshape.output_dtype)
        throw GraphError(GraphError::Kind::Shape,
                         e.from_node + ":out produces dtype " +
                             dtype_name(*pshape.output_dtype) + ", edge carries " +
                             dtype_name(e.dtype));
    }
  }

  // A graph input feeding several edges must do so at one consistent size.
  for (const auto& name : g.inputs) {
    uint64_t bytes = 0;
    bool used = false;
    for (const auto& e : g.edges) {
      if (e.from_input != name) continue;
      if (used && e.bytes() != bytes)
        throw GraphError(GraphError::Kind::Shape,
                         "graph input \"" + name + "\" used at inconsistent sizes");
      bytes = e.bytes();
      used = true;
    }
    if (!used)
      throw GraphError(GraphError::Kind::Id, "graph input \"" + name + "\" is never consumed");
  }

  topo_order(g);  // rejects cycles
  return g;
}

std::vector<int> topo_order(const GraphIr& g) {
  const int n = static_cast<int>(g.nodes.size());
  std::vector<std::set<int>> preds(n);
  for (const auto& e : g.edges) {
    if (e.from_node.empty()) continue;
    preds[g.node_index(e.to_node)].insert(g.node_index(e.from_node));
  }

  std::vector<int> order;
  std::vector<bool> placed(n, false);
  while (static_cast<int>(order.size()) < n) {
    int picked = -1;
    for (int i = 0; i < n; ++i) {
      if (placed[i]) continue;
      bool ready = true;
      for (int p : preds[i])
        if (!placed[p]) ready = false;
      if (ready) {
        picked = i;
        break;
      }
    }
    if (picked < 0) {
      std::string names;
      for (int i = 0; i < n; ++i)
        if (!placed[i]) names += ' ' + g.nodes[i].name;
      throw GraphError(GraphError::Kind::Cycle, "cycle through:" + names);
    }
    placed[picked] = true;
    order.push_back(picked);
  }
  return order;
}

std::map<int, TilePlacement> place(const GraphIr& g, const GridConfig& grid) {
  if (g.nodes.size() > grid.tiles())
    throw PlaceError(std::to_string(g.nodes.size()) + " nodes exceed the " +
                     std::to_string(grid.cols) + "x" + std::to_string(grid.rows) + " grid (" +
                     std::to_string(grid.tiles()) + " tiles)");
  std::map<int, TilePlacement> table;
  const auto order = topo_order(g);
  for (size_t i = 0; i < order.size(); ++i)
    table[order[i]] = {static_cast<uint16_t>(i % grid.cols),
                       static_cast<uint16_t>(i / grid.cols)};
  return table;
}

}  // namespace tilert
