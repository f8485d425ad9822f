// SPDX-FileCopyrightText: (c) 2026 tilert contributors
// SPDX-License-Identifier: Apache-2.0

// tilert: compile a dataflow graph to a packed model, run inference against
// the tile-array simulator (in-process or over the wire service), benchmark
// the virtual clock, or dump per-op execution traces.
//
// Exit codes: 0 ok, 2 user/input error, 3 environment error (port in use,
// connect failures), 4 internal error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tilert/bench.hpp"
#include "tilert/compiler.hpp"
#include "tilert/config.hpp"
#include "tilert/runtime.hpp"
#include "tilert/service.hpp"

namespace {

using namespace tilert;

std::vector<uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string s = buf.str();
  return {s.begin(), s.end()};
}

void write_file(const std::string& path, std::span<const uint8_t> data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write file: " + path);
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size()));
  if (!out) throw ConfigError("short write: " + path);
}

// CLI flag values overlaid onto a config file (flags win).
struct Overrides {
  std::string config_path;
  std::optional<int64_t> grid_cols, grid_rows, local_mem, global_mem;
  std::optional<int64_t> dma_setup_cost, dma_bytes_per_tick, kernel_elems_per_tick, port;
  std::optional<std::string> cache_model;
};

void add_config_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "key=value config file");
  cmd->add_option("--grid-cols", o.grid_cols, "tile columns");
  cmd->add_option("--grid-rows", o.grid_rows, "tile rows");
  cmd->add_option("--local-mem", o.local_mem, "tile-local memory bytes");
  cmd->add_option("--global-mem", o.global_mem, "global memory bytes");
  cmd->add_option("--cache", o.cache_model, "cache model: off | stale_until_flush");
  cmd->add_option("--dma-setup-cost", o.dma_setup_cost, "DMA setup cost, ticks");
  cmd->add_option("--dma-bytes-per-tick", o.dma_bytes_per_tick, "DMA bandwidth");
  cmd->add_option("--kernel-elems-per-tick", o.kernel_elems_per_tick, "kernel throughput");
  cmd->add_option("--port", o.port, "TCP port (serve)");
}

CliConfig resolve_config(const Overrides& o) {
  CliConfig cfg;
  if (!o.config_path.empty()) cfg = load_config_file(o.config_path);
  if (o.grid_cols) cfg.sim.grid.cols = static_cast<uint16_t>(*o.grid_cols);
  if (o.grid_rows) cfg.sim.grid.rows = static_cast<uint16_t>(*o.grid_rows);
  if (o.local_mem) cfg.sim.local_mem_bytes = static_cast<uint32_t>(*o.local_mem);
  if (o.global_mem) cfg.sim.global_mem_bytes = static_cast<uint64_t>(*o.global_mem);
  if (o.dma_setup_cost) cfg.sim.dma_setup_cost = static_cast<uint32_t>(*o.dma_setup_cost);
  if (o.dma_bytes_per_tick)
    cfg.sim.dma_bytes_per_tick = static_cast<uint32_t>(*o.dma_bytes_per_tick);
  if (o.kernel_elems_per_tick)
    cfg.sim.kernel_elems_per_tick = static_cast<uint32_t>(*o.kernel_elems_per_tick);
  if (o.port) cfg.port = static_cast<uint16_t>(*o.port);
  if (o.cache_model) {
    if (*o.cache_model == "off") cfg.sim.cache_model = CacheModel::Off;
    else if (*o.cache_model == "stale_until_flush")
      cfg.sim.cache_model = CacheModel::StaleUntilFlush;
    else throw ConfigError("--cache must be 'off' or 'stale_until_flush'");
  }
  return cfg;
}

RuntimeSession make_session(const CliConfig& cfg, const CompiledModel& model) {
  RuntimeSession session(cfg.sim);
  session.load_image(model.image);
  session.load_plan(model.rcbs, model.manifest);
  return session;
}

int cmd_compile(const std::string& graph_path, const std::string& out_dir,
                const std::string& weights_dir, const Overrides& o, bool emit_cache_flush,
                bool use_events) {
  const CliConfig cfg = resolve_config(o);
  const std::vector<uint8_t> text = read_file(graph_path);
  const GraphIr g = parse_graph(std::string(text.begin(), text.end()));

  std::map<uint32_t, std::vector<uint8_t>> payloads;
  for (const NodeIr& n : g.nodes)
    for (const auto& [port, id] : n.weights) {
      if (payloads.count(id)) continue;
      if (weights_dir.empty())
        throw ConfigError("graph references weight file " + std::to_string(id) +
                          " but no --weights directory was given");
      payloads[id] = read_file(weights_dir + "/" + std::to_string(id) + ".bin");
    }

  LowerOptions opts;
  opts.emit_cache_flush = emit_cache_flush;
  opts.use_events = use_events;
  const auto placement = place(g, cfg.sim.grid);
  const CompiledModel model = pack(lower(g, placement, cfg.sim.grid, opts), payloads);
  save_model(model, out_dir);
  std::printf("%zu block(s), image %zu bytes -> %s\n", model.rcbs.size(), model.image.size(),
              out_dir.c_str());
  return 0;
}

int cmd_infer(const std::string& model_dir, const std::string& input_path,
              const std::string& output_path, const Overrides& o) {
  const CliConfig cfg = resolve_config(o);
  RuntimeSession session = make_session(cfg, load_model(model_dir));
  const std::vector<uint8_t> output = session.run(read_file(input_path));
  write_file(output_path, output);
  return 0;
}

int cmd_trace(const std::string& model_dir, const std::string& input_path, const Overrides& o) {
  const CliConfig cfg = resolve_config(o);
  RuntimeSession session = make_session(cfg, load_model(model_dir));
  session.run(read_file(input_path));
  for (const ExecTrace& t : session.last_traces()) std::fputs(t.to_text().c_str(), stdout);
  return 0;
}

int cmd_serve(const std::string& model_dir, const Overrides& o, bool once) {
  const CliConfig cfg = resolve_config(o);
  ServeOptions so;
  so.port = cfg.port;
  so.sim = cfg.sim;
  Server server(so);
  if (!model_dir.empty()) {
    const CompiledModel model = load_model(model_dir);
    server.session().load_image(model.image);
    server.session().load_plan(model.rcbs, model.manifest);
  }
  std::printf("listening on 127.0.0.1:%u\n", server.port());
  std::fflush(stdout);
  if (once) {
    server.serve_one(-1);
    return 0;
  }
  server.serve();
  return 0;
}

int cmd_bench_model(const std::string& model_dir, size_t iterations, size_t warmup, bool csv,
                    const Overrides& o) {
  const CliConfig cfg = resolve_config(o);
  const KernelBenchReport report =
      run_kernel_bench(load_model(model_dir), iterations, warmup, cfg.sim);
  std::fputs((csv ? report.to_csv() : report.to_text()).c_str(), stdout);
  return 0;
}

int cmd_bench_sweep(const std::vector<uint32_t>& sizes, uint64_t volume, uint32_t penalty,
                    bool csv, const Overrides& o) {
  const CliConfig cfg = resolve_config(o);
  const TransferSweepReport report = run_transfer_sweep(sizes, volume, penalty, cfg.sim);
  std::fputs((csv ? report.to_csv() : report.to_text()).c_str(), stdout);
  return 0;
}

int classify(const Error& e) {
  if (dynamic_cast<const TransportError*>(&e)) return 3;
  if (dynamic_cast<const ExecError*>(&e) || dynamic_cast<const PipelineError*>(&e)) return 4;
  return 2;  // the caller's artifacts, flags, or payload sizes
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tile-array runtime: control-as-data command streams over a register-level HAL"};
  app.require_subcommand(1);

  Overrides o;

  auto* compile = app.add_subcommand("compile", "lower a graph JSON into a packed model dir");
  std::string graph_path, out_dir, weights_dir;
  bool emit_cache_flush = false, use_events = false;
  compile->add_option("graph", graph_path, "graph IR JSON")->required();
  compile->add_option("-o,--out", out_dir, "output model directory")->required();
  compile->add_option("--weights", weights_dir, "directory of <file_id>.bin payloads");
  compile->add_flag("--emit-cache-flush", emit_cache_flush,
                    "flush host-written inputs before TO_DEVICE DMA");
  compile->add_flag("--use-events", use_events, "wait on completion events instead of polling");
  add_config_flags(compile, o);

  auto* infer = app.add_subcommand("infer", "run one inference in-process");
  std::string model_dir, input_path, output_path;
  infer->add_option("model", model_dir, "packed model directory")->required();
  infer->add_option("input", input_path, "input tensor bytes")->required();
  infer->add_option("output", output_path, "output file")->required();
  add_config_flags(infer, o);

  auto* trace = app.add_subcommand("trace", "run one inference and print per-op trace lines");
  trace->add_option("model", model_dir, "packed model directory")->required();
  trace->add_option("input", input_path, "input tensor bytes")->required();
  add_config_flags(trace, o);

  auto* serve = app.add_subcommand("serve", "run the wire service on loopback");
  bool once = false;
  serve->add_option("model", model_dir, "model directory to preload (optional)");
  serve->add_flag("--once", once, "serve a single connection, then exit");
  add_config_flags(serve, o);

  auto* bench = app.add_subcommand("bench", "latency stats or the transfer sweep");
  bool sweep = false, csv = false;
  uint64_t iterations = 1000, warmup = 0, volume = 1u << 20;
  uint32_t penalty = 600;
  std::vector<uint32_t> sizes{1024, 4096, 16384, 32768};
  bench->add_option("model", model_dir, "model directory (latency mode)");
  bench->add_flag("--sweep", sweep, "block-size transfer sweep instead of a model bench");
  bench->add_flag("--csv", csv, "CSV instead of a table");
  bench->add_option("--iterations", iterations, "inference count");
  bench->add_option("--warmup", warmup, "samples to drop");
  bench->add_option("--sizes", sizes, "sweep block sizes, bytes")->delimiter(',');
  bench->add_option("--volume", volume, "bytes moved per sweep path");
  bench->add_option("--penalty", penalty, "mediated path extra ticks per transfer");
  add_config_flags(bench, o);

  CLI11_PARSE(app, argc, argv);

  try {
    if (compile->parsed())
      return cmd_compile(graph_path, out_dir, weights_dir, o, emit_cache_flush, use_events);
    if (infer->parsed()) return cmd_infer(model_dir, input_path, output_path, o);
    if (trace->parsed()) return cmd_trace(model_dir, input_path, o);
    if (serve->parsed()) return cmd_serve(model_dir, o, once);
    if (bench->parsed()) {
      if (sweep) return cmd_bench_sweep(sizes, volume, penalty, csv, o);
      if (model_dir.empty()) throw ConfigError("bench needs a model directory or --sweep");
      return cmd_bench_model(model_dir, iterations, warmup, csv, o);
    }
  } catch (const Error& e) {
    std::cerr << "tilert: " << e.what() << "\n";
    return classify(e);
  } catch (const std::exception& e) {
    std::cerr << "tilert: internal: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
