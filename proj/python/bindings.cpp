// SPDX-FileCopyrightText: (c) 2026 tilert contributors
// SPDX-License-Identifier: Apache-2.0

// Python surface over the offline compiler and the simulated runtime. The
// wire service stays C++-only; python callers run inference in-process.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstring>
#include <map>
#include <string>
#include <vector>

#include "tilert/bench.hpp"
#include "tilert/compiler.hpp"
#include "tilert/config.hpp"
#include "tilert/crc32.hpp"
#include "tilert/model.hpp"
#include "tilert/rcb.hpp"
#include "tilert/rimfs.hpp"
#include "tilert/runtime.hpp"

namespace py = pybind11;
using namespace tilert;

namespace {

// Flat copy of any C-contiguous buffer (bytes, bytearray, numpy array).
std::vector<uint8_t> copy_buffer(const py::buffer& src) {
  const py::buffer_info info = src.request();
  py::ssize_t total = info.itemsize;
  for (py::ssize_t d : info.shape) total *= d;
  py::ssize_t stride = info.itemsize;
  for (py::ssize_t i = info.ndim - 1; i >= 0; --i) {
    if (info.shape[i] > 1 && info.strides[i] != stride)
      throw py::value_error("buffer must be C-contiguous");
    stride *= info.shape[i];
  }
  const auto* p = static_cast<const uint8_t*>(info.ptr);
  return {p, p + static_cast<size_t>(total)};
}

py::bytes as_bytes(const std::vector<uint8_t>& v) {
  return py::bytes(reinterpret_cast<const char*>(v.data()),
                   static_cast<py::ssize_t>(v.size()));
}

CacheModel cache_model_from_name(const std::string& name) {
  if (name == "off") return CacheModel::Off;
  if (name == "stale_until_flush") return CacheModel::StaleUntilFlush;
  throw py::value_error("cache_model must be 'off' or 'stale_until_flush'");
}

SimConfig make_sim_config(uint16_t cols, uint16_t rows, uint32_t local_mem_bytes,
                          uint64_t global_mem_bytes, const std::string& cache_model,
                          uint32_t dma_setup_cost, uint32_t dma_bytes_per_tick,
                          uint32_t kernel_elems_per_tick) {
  SimConfig cfg;
  cfg.grid = GridConfig{cols, rows};
  cfg.local_mem_bytes = local_mem_bytes;
  cfg.global_mem_bytes = global_mem_bytes;
  cfg.cache_model = cache_model_from_name(cache_model);
  cfg.dma_setup_cost = dma_setup_cost;
  cfg.dma_bytes_per_tick = dma_bytes_per_tick;
  cfg.kernel_elems_per_tick = kernel_elems_per_tick;
  return cfg;
}

py::dict addr_to_dict(const AddrRef& a) {
  py::dict d;
  switch (a.kind) {
    case AddrKind::Absolute:
      d["kind"] = "ABSOLUTE";
      d["addr"] = a.addr;
      break;
    case AddrKind::RelativeTile:
      d["kind"] = "TILE";
      d["col"] = a.col;
      d["row"] = a.row;
      d["offset"] = a.tile_offset;
      break;
    case AddrKind::Symbolic:
      d["kind"] = "SYMBOLIC";
      d["buffer_id"] = a.buffer_id;
      d["offset"] = a.offset;
      break;
  }
  return d;
}

py::dict op_to_dict(const Operation& op) {
  py::dict d;
  d["op"] = opcode_name(op.opcode());
  d["flags"] = op.flags;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, RegWriteOp>) {
          d["addr"] = addr_to_dict(p.addr);
          d["value"] = p.value;
        } else if constexpr (std::is_same_v<T, RegReadOp>) {
          d["addr"] = addr_to_dict(p.addr);
          d["capture_slot"] = p.capture_slot;
        } else if constexpr (std::is_same_v<T, WriteBlockOp>) {
          d["addr"] = addr_to_dict(p.addr);
          d["data"] = as_bytes(p.data);
        } else if constexpr (std::is_same_v<T, DmaTriggerOp>) {
          d["dir"] = p.direction == DmaDir::ToDevice ? "TO_DEVICE" : "FROM_DEVICE";
          d["src"] = addr_to_dict(p.src);
          d["dst"] = addr_to_dict(p.dst);
          d["length"] = p.length;
        } else if constexpr (std::is_same_v<T, PollMaskOp>) {
          d["addr"] = addr_to_dict(p.addr);
          d["mask"] = p.mask;
          d["expected"] = p.expected;
          d["timeout_us"] = p.timeout_us;
        } else if constexpr (std::is_same_v<T, CacheFlushOp> ||
                             std::is_same_v<T, CacheInvalidateOp>) {
          d["addr"] = addr_to_dict(p.addr);
          d["length"] = p.length;
        } else if constexpr (std::is_same_v<T, WaitEventOp>) {
          d["event_id"] = p.event_id;
        }
      },
      op.payload);
  return d;
}

const char* block_type_name(BlockType t) {
  switch (t) {
    case BlockType::Compute: return "COMPUTE";
    case BlockType::Transfer: return "TRANSFER";
    case BlockType::Config: return "CONFIG";
  }
  return "UNKNOWN";
}

py::dict stats_to_dict(const LatencyStats& s) {
  py::dict d;
  d["count"] = s.count;
  d["mean"] = s.mean;
  d["stddev"] = s.stddev;
  d["cv"] = s.cv;
  d["p50"] = s.p50;
  d["p99"] = s.p99;
  d["max"] = s.max;
  return d;
}

// RuntimeSession provisioned from a compiled model at construction.
class PySession {
 public:
  PySession(const CompiledModel& model, const SimConfig& cfg) : session_(cfg) {
    session_.load_image(model.image);
    session_.load_plan(model.rcbs, model.manifest);
  }

  py::bytes run(const py::buffer& input) {
    const std::vector<uint8_t> in = copy_buffer(input);
    return as_bytes(session_.run(in));
  }

  py::dict telemetry() const {
    const Telemetry& t = session_.telemetry();
    py::dict d;
    d["inferences"] = t.inferences;
    d["stage_ticks"] = py::make_tuple(t.stage_ticks[0], t.stage_ticks[1], t.stage_ticks[2]);
    d["last_error"] = t.last_error;
    return d;
  }

  std::string trace_text() const {
    std::string out;
    for (const ExecTrace& t : session_.last_traces()) out += t.to_text();
    return out;
  }

  uint64_t input_bytes() const { return session_.manifest().input_bytes(); }
  uint64_t output_bytes() const { return session_.manifest().output_bytes(); }

 private:
  RuntimeSession session_;
};

}  // namespace

PYBIND11_MODULE(_tilert, m) {
  m.doc() = "Offline compiler and simulated tile-array runtime";

  py::register_exception<Error>(m, "TilertError", PyExc_RuntimeError);

  m.def(
      "crc32", [](const py::buffer& data) { return crc32(copy_buffer(data)); },
      py::arg("data"), "CRC-32 (IEEE reflected) of a byte buffer");

  m.def(
      "build_image",
      [](const std::vector<std::pair<uint32_t, py::buffer>>& files, uint32_t alignment) {
        std::vector<FilePayload> payloads;
        payloads.reserve(files.size());
        for (const auto& [id, buf] : files) payloads.emplace_back(id, copy_buffer(buf));
        return as_bytes(build_image(payloads, alignment));
      },
      py::arg("files"), py::arg("alignment") = 64,
      "Pack (file_id, payload) pairs into a read-only image");

  m.def(
      "decode_rcb",
      [](const py::buffer& data) {
        const Rcb rcb = decode_rcb(copy_buffer(data));
        py::dict d;
        d["block_type"] = block_type_name(rcb.block_type);
        d["version"] = rcb.version;
        d["deps"] = rcb.deps;
        py::list ops;
        for (const Operation& op : rcb.ops) ops.append(op_to_dict(op));
        d["ops"] = ops;
        return d;
      },
      py::arg("data"), "Parse one encoded command block into a dict");

  py::class_<CompiledModel>(m, "CompiledModel")
      .def_property_readonly("rcbs",
                             [](const CompiledModel& model) {
                               py::list out;
                               for (const auto& rcb : model.rcbs) out.append(as_bytes(rcb));
                               return out;
                             })
      .def_property_readonly("image",
                             [](const CompiledModel& model) { return as_bytes(model.image); })
      .def_property_readonly("manifest_json",
                             [](const CompiledModel& model) { return model.manifest.to_json(); })
      .def_property_readonly(
          "placement_json",
          [](const CompiledModel& model) { return placement_to_json(model.placement); })
      .def_property_readonly(
          "input_bytes", [](const CompiledModel& model) { return model.manifest.input_bytes(); })
      .def_property_readonly(
          "output_bytes", [](const CompiledModel& model) { return model.manifest.output_bytes(); })
      .def("save", [](const CompiledModel& model, const std::string& dir) { save_model(model, dir); },
           py::arg("dir"))
      .def_static("load", [](const std::string& dir) { return load_model(dir); }, py::arg("dir"));

  m.def(
      "compile_graph",
      [](const std::string& graph_text, const py::dict& weights, uint16_t cols, uint16_t rows,
         bool emit_cache_flush, bool use_events, uint32_t poll_timeout_us) {
        std::map<uint32_t, std::vector<uint8_t>> payloads;
        for (const auto& [key, value] : weights)
          payloads[key.cast<uint32_t>()] = copy_buffer(value.cast<py::buffer>());
        LowerOptions options;
        options.emit_cache_flush = emit_cache_flush;
        options.use_events = use_events;
        options.poll_timeout_us = poll_timeout_us;
        return compile_graph(graph_text, payloads, GridConfig{cols, rows}, options);
      },
      py::arg("graph_text"), py::arg("weights") = py::dict(), py::arg("cols") = 4,
      py::arg("rows") = 7, py::arg("emit_cache_flush") = false, py::arg("use_events") = false,
      py::arg("poll_timeout_us") = 1'000'000,
      "parse -> place -> lower -> pack, the full offline path");

  py::class_<PySession>(m, "Session")
      .def(py::init([](const CompiledModel& model, uint16_t cols, uint16_t rows,
                       uint32_t local_mem_bytes, uint64_t global_mem_bytes,
                       const std::string& cache_model, uint32_t dma_setup_cost,
                       uint32_t dma_bytes_per_tick, uint32_t kernel_elems_per_tick) {
             return PySession(model, make_sim_config(cols, rows, local_mem_bytes,
                                                     global_mem_bytes, cache_model,
                                                     dma_setup_cost, dma_bytes_per_tick,
                                                     kernel_elems_per_tick));
           }),
           py::arg("model"), py::arg("cols") = 4, py::arg("rows") = 7,
           py::arg("local_mem_bytes") = 65536, py::arg("global_mem_bytes") = 64ull << 20,
           py::arg("cache_model") = "off", py::arg("dma_setup_cost") = 100,
           py::arg("dma_bytes_per_tick") = 64, py::arg("kernel_elems_per_tick") = 64)
      .def("run", &PySession::run, py::arg("input"),
           "One inference: Input tensors concatenated in manifest order")
      .def("telemetry", &PySession::telemetry)
      .def("trace_text", &PySession::trace_text)
      .def_property_readonly("input_bytes", &PySession::input_bytes)
      .def_property_readonly("output_bytes", &PySession::output_bytes);

  m.def(
      "compute_stats",
      [](const std::vector<uint64_t>& samples, size_t warmup) {
        return stats_to_dict(compute_stats(samples, warmup));
      },
      py::arg("samples"), py::arg("warmup") = 0);

  m.def(
      "kernel_bench",
      [](const CompiledModel& model, size_t iterations, size_t warmup) {
        const KernelBenchReport r = run_kernel_bench(model, iterations, warmup);
        py::dict d;
        d["iterations"] = r.iterations;
        d["warmup"] = r.warmup;
        d["end_to_end"] = stats_to_dict(r.end_to_end);
        py::list stages;
        for (const LatencyStats& s : r.stages) stages.append(stats_to_dict(s));
        d["stages"] = stages;
        d["traces_identical"] = r.traces_identical;
        d["text"] = r.to_text();
        return d;
      },
      py::arg("model"), py::arg("iterations"), py::arg("warmup") = 0,
      "Latency distribution over repeated inferences on the virtual clock");

  m.def(
      "transfer_sweep",
      [](const std::vector<uint32_t>& block_sizes, uint64_t volume, uint32_t mediation_penalty) {
        const TransferSweepReport r = run_transfer_sweep(block_sizes, volume, mediation_penalty);
        py::dict d;
        d["volume"] = r.volume;
        d["dma_setup_cost"] = r.dma_setup_cost;
        d["mediation_penalty"] = r.mediation_penalty;
        d["dma_bytes_per_tick"] = r.dma_bytes_per_tick;
        py::list rows;
        for (const SweepRow& row : r.rows) {
          py::dict e;
          e["block_size"] = row.block_size;
          e["transfers"] = row.transfers;
          e["direct_ticks"] = row.direct_ticks;
          e["mediated_ticks"] = row.mediated_ticks;
          e["measured_speedup"] = row.measured_speedup;
          e["predicted_speedup"] = row.predicted_speedup;
          rows.append(e);
        }
        d["rows"] = rows;
        d["text"] = r.to_text();
        return d;
      },
      py::arg("block_sizes"), py::arg("volume"), py::arg("mediation_penalty") = 600,
      "Direct vs mediated transfer cost per block size");
}
