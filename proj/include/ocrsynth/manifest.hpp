#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "ocrsynth/common.hpp"

namespace ocrsynth {

inline std::string digest_file(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  return hex64(fnv1a64(bytes));
}

// Provenance record written next to every generated artifact: what ran, with
// which resolved configuration, over which input bytes, producing which
// output bytes.
struct RunManifest {
  std::string subcommand;
  nlohmann::ordered_json config;
  std::map<std::string, std::string> inputs;   // path -> digest
  std::map<std::string, std::string> outputs;  // path -> digest
  uint64_t master_seed = 0;
  std::string tool_version = kVersion;
  int64_t duration_ms = 0;

  void add_input(const std::filesystem::path& path) { inputs[path.string()] = digest_file(path); }
  void add_output(const std::filesystem::path& path) {
    outputs[path.string()] = digest_file(path);
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j{{"subcommand", subcommand},
                             {"config", config},
                             {"inputs", nlohmann::ordered_json::object()},
                             {"outputs", nlohmann::ordered_json::object()},
                             {"master_seed", master_seed},
                             {"tool_version", tool_version},
                             {"duration_ms", duration_ms}};
    for (const auto& [k, v] : inputs) j["inputs"][k] = v;
    for (const auto& [k, v] : outputs) j["outputs"][k] = v;
    return j;
  }

  // Written as <primary_output>.manifest.json.
  void write_alongside(const std::filesystem::path& primary_output) const {
    std::filesystem::path p = primary_output;
    p += ".manifest.json";
    write_file(p, to_json().dump(2) + "\n");
  }
};

}  // namespace ocrsynth
