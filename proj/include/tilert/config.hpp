// SPDX-FileCopyrightText: (c) 2026 tilert contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>

#include "tilert/frame.hpp"
#include "tilert/sim_device.hpp"

namespace tilert {

// Runtime configuration as key=value text ('#' comments, blank lines
// ignored), overridable by CLI flags:
//
//   grid_cols = 4
//   grid_rows = 7
//   local_mem_bytes = 65536
//   global_mem_bytes = 67108864
//   cache_model = off | stale_until_flush
//   dma_setup_cost = 100
//   dma_bytes_per_tick = 64
//   kernel_elems_per_tick = 64
//   port = 7410

struct CliConfig {
  SimConfig sim;
  uint16_t port = kDefaultPort;

  bool operator==(const CliConfig&) const = default;
};

/// Throws ConfigError on an unknown key, a malformed line, or a value that
/// does not parse / overflows its field.
CliConfig parse_config_text(const std::string& text);

/// Reads and parses a config file. Throws ConfigError (unreadable file too).
CliConfig load_config_file(const std::string& path);

const char* cache_model_name(CacheModel m);

}  // namespace tilert
