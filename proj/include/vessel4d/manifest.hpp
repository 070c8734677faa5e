#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "vessel4d/graph_io.hpp"
#include "vessel4d/pipeline.hpp"

namespace vessel4d {

const char* tool_version();

/// Provenance record written next to every command's outputs.
struct RunManifest {
  std::string subcommand;
  Json config = Json::object();
  std::vector<std::pair<std::string, std::string>> inputs;   // path, sha256
  std::vector<std::pair<std::string, std::string>> outputs;  // path, sha256
  StageTimings timings;

  void add_input(const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path);
  Json to_json() const;
};

}  // namespace vessel4d
