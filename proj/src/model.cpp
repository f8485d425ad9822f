// SPDX-FileCopyrightText: (c) 2026 tilert contributors
// SPDX-License-Identifier: Apache-2.0

#include "tilert/model.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace tilert {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

BufferClass parse_class(const std::string& s) {
  if (s == "WEIGHT") return BufferClass::Weight;
  if (s == "ACTIVATION") return BufferClass::Activation;
  if (s == "INPUT") return BufferClass::Input;
  if (s == "OUTPUT") return BufferClass::Output;
  throw ConfigError("unknown buffer class \"" + s + "\"");
}

std::vector<uint8_t> read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& p, std::span<const uint8_t> data) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + p.string());
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size()));
  if (!out) throw ConfigError("short write to " + p.string());
}

}  // namespace

uint64_t ModelManifest::input_bytes() const {
  uint64_t total = 0;
  for (uint32_t id : inputs) total += buffers.at(id).size;
  return total;
}

uint64_t ModelManifest::output_bytes() const {
  uint64_t total = 0;
  for (uint32_t id : outputs) total += buffers.at(id).size;
  return total;
}

std::string ModelManifest::to_json() const {
  json doc;
  doc["buffers"] = json::array();
  for (const auto& [id, spec] : buffers) {
    doc["buffers"].push_back({{"id", id},
                              {"size", spec.size},
                              {"align", spec.alignment},
                              {"class", buffer_class_name(spec.cls)}});
  }
  doc["inputs"] = inputs;
  doc["outputs"] = outputs;
  return doc.dump(2) + "\n";
}

ModelManifest ModelManifest::from_json(const std::string& text) {
  ModelManifest m;
  try {
    const json doc = json::parse(text);
    for (const auto& jb : doc.at("buffers")) {
      BufferSpec spec;
      spec.size = jb.at("size").get<uint32_t>();
      spec.alignment = jb.at("align").get<uint32_t>();
      spec.cls = parse_class(jb.at("class").get<std::string>());
      const uint32_t id = jb.at("id").get<uint32_t>();
      if (!m.buffers.emplace(id, spec).second)
        throw ConfigError("manifest repeats buffer id " + std::to_string(id));
    }
    for (const auto& ji : doc.at("inputs")) m.inputs.push_back(ji.get<uint32_t>());
    for (const auto& jo : doc.at("outputs")) m.outputs.push_back(jo.get<uint32_t>());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed manifest: ") + e.what());
  }
  for (uint32_t id : m.inputs)
    if (!m.buffers.count(id)) throw ConfigError("manifest input id not in buffers");
  for (uint32_t id : m.outputs)
    if (!m.buffers.count(id)) throw ConfigError("manifest output id not in buffers");
  return m;
}

std::string placement_to_json(const std::vector<PlacementEntry>& placement) {
  json doc;
  doc["nodes"] = json::array();
  for (const auto& p : placement)
    doc["nodes"].push_back({{"node", p.node}, {"col", p.col}, {"row", p.row}, {"rcb", p.rcb}});
  return doc.dump(2) + "\n";
}

std::vector<PlacementEntry> placement_from_json(const std::string& text) {
  std::vector<PlacementEntry> placement;
  try {
    const json doc = json::parse(text);
    for (const auto& jn : doc.at("nodes")) {
      PlacementEntry p;
      p.node = jn.at("node").get<std::string>();
      p.col = jn.at("col").get<uint16_t>();
      p.row = jn.at("row").get<uint16_t>();
      p.rcb = jn.at("rcb").get<uint32_t>();
      placement.push_back(std::move(p));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed placement: ") + e.what());
  }
  return placement;
}

void save_model(const CompiledModel& model, const std::string& dir) {
  fs::create_directories(dir);
  write_file(fs::path(dir) / "model.rimfs", model.image);
  for (size_t i = 0; i < model.rcbs.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "%03zu.rcb", i);
    write_file(fs::path(dir) / name, model.rcbs[i]);
  }
  const std::string manifest = model.manifest.to_json();
  write_file(fs::path(dir) / "manifest.json",
             {reinterpret_cast<const uint8_t*>(manifest.data()), manifest.size()});
  const std::string placement = placement_to_json(model.placement);
  write_file(fs::path(dir) / "placement.json",
             {reinterpret_cast<const uint8_t*>(placement.data()), placement.size()});
}

CompiledModel load_model(const std::string& dir) {
  const fs::path root(dir);
  if (!fs::is_directory(root)) throw ConfigError(dir + " is not a model directory");

  CompiledModel model;
  model.image = read_file(root / "model.rimfs");
  for (size_t i = 0;; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "%03zu.rcb", i);
    if (!fs::exists(root / name)) break;
    model.rcbs.push_back(read_file(root / name));
  }
  const auto manifest = read_file(root / "manifest.json");
  model.manifest = ModelManifest::from_json(
      std::string(reinterpret_cast<const char*>(manifest.data()), manifest.size()));
  const auto placement = read_file(root / "placement.json");
  model.placement = placement_from_json(
      std::string(reinterpret_cast<const char*>(placement.data()), placement.size()));
  return model;
}

}  // namespace tilert
