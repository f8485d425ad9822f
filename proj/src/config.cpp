// SPDX-FileCopyrightText: (c) 2026 tilert contributors
// SPDX-License-Identifier: Apache-2.0

#include "tilert/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace tilert {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

uint64_t parse_u64(const std::string& key, const std::string& value, uint64_t max) {
  uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size())
    throw ConfigError("value for '" + key + "' is not an unsigned integer: '" + value + "'");
  if (v > max)
    throw ConfigError("value for '" + key + "' exceeds " + std::to_string(max) + ": " + value);
  return v;
}

}  // namespace

const char* cache_model_name(CacheModel m) {
  switch (m) {
    case CacheModel::Off: return "off";
    case CacheModel::StaleUntilFlush: return "stale_until_flush";
  }
  return "?";
}

CliConfig parse_config_text(const std::string& text) {
  CliConfig cfg;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value, got '" +
                        trim(raw) + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": empty key or value");

    if (key == "grid_cols") {
      cfg.sim.grid.cols = static_cast<uint16_t>(parse_u64(key, value, UINT16_MAX));
      if (cfg.sim.grid.cols == 0) throw ConfigError("grid_cols must be > 0");
    } else if (key == "grid_rows") {
      cfg.sim.grid.rows = static_cast<uint16_t>(parse_u64(key, value, UINT16_MAX));
      if (cfg.sim.grid.rows == 0) throw ConfigError("grid_rows must be > 0");
    } else if (key == "local_mem_bytes") {
      cfg.sim.local_mem_bytes = static_cast<uint32_t>(parse_u64(key, value, UINT32_MAX));
    } else if (key == "global_mem_bytes") {
      cfg.sim.global_mem_bytes = parse_u64(key, value, UINT64_MAX);
    } else if (key == "cache_model") {
      if (value == "off") cfg.sim.cache_model = CacheModel::Off;
      else if (value == "stale_until_flush") cfg.sim.cache_model = CacheModel::StaleUntilFlush;
      else throw ConfigError("cache_model must be 'off' or 'stale_until_flush', got '" + value + "'");
    } else if (key == "dma_setup_cost") {
      cfg.sim.dma_setup_cost = static_cast<uint32_t>(parse_u64(key, value, UINT32_MAX));
    } else if (key == "dma_bytes_per_tick") {
      cfg.sim.dma_bytes_per_tick = static_cast<uint32_t>(parse_u64(key, value, UINT32_MAX));
      if (cfg.sim.dma_bytes_per_tick == 0) throw ConfigError("dma_bytes_per_tick must be > 0");
    } else if (key == "kernel_elems_per_tick") {
      cfg.sim.kernel_elems_per_tick = static_cast<uint32_t>(parse_u64(key, value, UINT32_MAX));
      if (cfg.sim.kernel_elems_per_tick == 0)
        throw ConfigError("kernel_elems_per_tick must be > 0");
    } else if (key == "port") {
      cfg.port = static_cast<uint16_t>(parse_u64(key, value, UINT16_MAX));
    } else {
      throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
  }
  return cfg;
}

CliConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

}  // namespace tilert
