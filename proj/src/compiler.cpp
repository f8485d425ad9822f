// SPDX-FileCopyrightText: (c) 2026 tilert contributors
// SPDX-License-Identifier: Apache-2.0

#include "tilert/compiler.hpp"

#include <algorithm>
#include <cstdio>

#include "tilert/rimfs.hpp"
#include "tilert/sim_device.hpp"

namespace tilert {

namespace {

std::string id_str(uint32_t id) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "0x%08x", id);
  return buf;
}

Operation make_op(OpPayload payload) {
  Operation op;
  op.payload = std::move(payload);
  return op;
}

}  // namespace

LoweredGraph lower(const GraphIr& g, const std::map<int, TilePlacement>& placement,
                   const GridConfig& grid, const LowerOptions& options) {
  const std::vector<int> order = topo_order(g);

  std::vector<int> topo_pos(g.nodes.size(), -1);
  for (size_t p = 0; p < order.size(); ++p) topo_pos[order[p]] = static_cast<int>(p);

  for (int idx : order) {
    if (!placement.count(idx))
      throw LowerError("node '" + g.nodes[idx].name + "' has no tile placement");
  }

  // Tensor numbering: graph inputs in declaration order, then node outputs
  // in pipeline order. Weight tensors keep their rimfs file ids, which the
  // parser caps below kFirstRuntimeTensorId.
  std::map<std::string, uint32_t> input_id;
  std::vector<uint32_t> node_out_id(g.nodes.size(), 0);
  uint32_t next_id = kFirstRuntimeTensorId;
  for (const auto& name : g.inputs) input_id[name] = next_id++;
  for (int idx : order) node_out_id[idx] = next_id++;

  // Single producer per (node, port) is guaranteed by parse_graph.
  std::map<std::pair<std::string, std::string>, const EdgeIr*> feeds;
  for (const EdgeIr& e : g.edges) feeds[{e.to_node, e.to_port}] = &e;

  LoweredGraph out;
  std::map<uint32_t, uint64_t> input_consumed_bytes;  // graph input id -> size
  std::map<uint32_t, uint32_t> weight_size_by_id;

  for (int idx : order) {
    const NodeIr& node = g.nodes[idx];
    const TilePlacement& at = placement.at(idx);
    const KernelLayout layout = kernel_layout(node.kernel, node.params);
    const std::vector<std::string> ports = kernel_input_ports(node.kernel);
    const uint32_t tile_index = static_cast<uint32_t>(at.row) * grid.cols + at.col;

    Rcb rcb;
    rcb.block_type = BlockType::Compute;

    rcb.ops.push_back(make_op(RegWriteOp{AddrRef::tile(at.col, at.row, kRegKernelId),
                                         static_cast<uint32_t>(node.kernel)}));
    for (size_t i = 0; i < node.params.size(); ++i)
      rcb.ops.push_back(make_op(
          RegWriteOp{AddrRef::tile(at.col, at.row, reg_param(static_cast<int>(i))),
                     node.params[i]}));

    std::vector<uint32_t> deps;
    for (size_t j = 0; j < ports.size(); ++j) {
      const TileBuffer& buf = layout.inputs[j];
      uint32_t src_id = 0;
      bool host_written = false;

      if (auto w = node.weights.find(ports[j]); w != node.weights.end()) {
        src_id = w->second;
        auto [it, fresh] = weight_size_by_id.emplace(src_id, buf.size);
        if (fresh) {
          out.weight_sizes.emplace_back(src_id, buf.size);
        } else if (it->second != buf.size) {
          throw LowerError("weight file " + id_str(src_id) + " is used at " +
                           std::to_string(it->second) + " and " + std::to_string(buf.size) +
                           " bytes; a file backs exactly one tensor extent");
        }
      } else {
        const EdgeIr* e = feeds.at({node.name, ports[j]});
        if (e->from_node.empty()) {
          src_id = input_id.at(e->from_input);
          host_written = true;
          auto [it, fresh] = input_consumed_bytes.emplace(src_id, buf.size);
          if (!fresh && it->second != buf.size)
            throw LowerError("graph input '" + e->from_input +
                             "' feeds ports of different sizes");
        } else {
          const int producer = g.node_index(e->from_node);
          src_id = node_out_id[producer];
          deps.push_back(static_cast<uint32_t>(topo_pos[producer]));
        }
      }

      // The host fills Input-class buffers between launches; under
      // STALE_UNTIL_FLUSH the DMA engine must not read a stale line.
      if (options.emit_cache_flush && host_written)
        rcb.ops.push_back(make_op(CacheFlushOp{AddrRef::symbolic(src_id, 0), buf.size}));

      rcb.ops.push_back(make_op(DmaTriggerOp{
          DmaDir::ToDevice, AddrRef::symbolic(src_id, 0),
          AddrRef::tile(at.col, at.row, static_cast<uint32_t>(kTileLocalMemOffset) + buf.offset),
          buf.size}));
    }

    rcb.ops.push_back(
        make_op(RegWriteOp{AddrRef::tile(at.col, at.row, kRegCtrl), kCtrlStart}));
    if (options.use_events) {
      rcb.ops.push_back(make_op(WaitEventOp{tile_index + 1}));
    } else {
      rcb.ops.push_back(make_op(PollMaskOp{AddrRef::tile(at.col, at.row, kRegStatus),
                                           kStatusDone, kStatusDone,
                                           options.poll_timeout_us}));
    }
    rcb.ops.push_back(make_op(DmaTriggerOp{
        DmaDir::FromDevice,
        AddrRef::tile(at.col, at.row,
                      static_cast<uint32_t>(kTileLocalMemOffset) + layout.output.offset),
        AddrRef::symbolic(node_out_id[idx], 0), layout.output.size}));

    std::sort(deps.begin(), deps.end());
    deps.erase(std::unique(deps.begin(), deps.end()), deps.end());
    rcb.deps = std::move(deps);

    out.rcbs.push_back(std::move(rcb));
    out.placement.push_back(
        {node.name, at.col, at.row, static_cast<uint32_t>(out.rcbs.size() - 1)});
  }

  // Manifest: every tensor the blocks reference symbolically.
  for (const auto& name : g.inputs) {
    const uint32_t id = input_id.at(name);
    auto it = input_consumed_bytes.find(id);
    if (it == input_consumed_bytes.end())
      throw LowerError("graph input '" + name + "' is never consumed");
    out.manifest.buffers[id] =
        BufferSpec{static_cast<uint32_t>(it->second), 64, BufferClass::Input};
    out.manifest.inputs.push_back(id);
  }
  for (int idx : order) {
    const KernelLayout layout = kernel_layout(g.nodes[idx].kernel, g.nodes[idx].params);
    out.manifest.buffers[node_out_id[idx]] =
        BufferSpec{layout.output.size, 64, BufferClass::Activation};
  }
  for (const std::string& ref : g.outputs) {
    const int idx = g.node_index(ref.substr(0, ref.find(':')));
    out.manifest.buffers[node_out_id[idx]].cls = BufferClass::Output;
    out.manifest.outputs.push_back(node_out_id[idx]);
  }
  for (const auto& [id, size] : out.weight_sizes)
    out.manifest.buffers[id] = BufferSpec{size, 64, BufferClass::Weight};

  return out;
}

CompiledModel pack(const LoweredGraph& lowered,
                   const std::map<uint32_t, std::vector<uint8_t>>& weight_payloads) {
  std::vector<FilePayload> files;
  files.reserve(lowered.weight_sizes.size());
  for (const auto& [id, size] : lowered.weight_sizes) {
    auto it = weight_payloads.find(id);
    if (it == weight_payloads.end())
      throw PackError("no payload for weight file " + id_str(id));
    if (it->second.size() != size)
      throw PackError("weight file " + id_str(id) + " payload is " +
                      std::to_string(it->second.size()) + " bytes, lowering expects " +
                      std::to_string(size));
    files.emplace_back(id, it->second);
  }

  CompiledModel model;
  model.rcbs.reserve(lowered.rcbs.size());
  for (const Rcb& rcb : lowered.rcbs) model.rcbs.push_back(encode_rcb(rcb));
  model.image = build_image(files);
  model.manifest = lowered.manifest;
  model.placement = lowered.placement;
  return model;
}

CompiledModel compile_graph(const std::string& graph_text,
                            const std::map<uint32_t, std::vector<uint8_t>>& weight_payloads,
                            const GridConfig& grid, const LowerOptions& options) {
  const GraphIr g = parse_graph(graph_text);
  const auto placement = place(g, grid);
  return pack(lower(g, placement, grid, options), weight_payloads);
}

}  // namespace tilert
