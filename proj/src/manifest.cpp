#include "vessel4d/manifest.hpp"

#include <algorithm>

#include "vessel4d/hash.hpp"

#ifndef VESSEL4D_VERSION
#define VESSEL4D_VERSION "0.0.0"
#endif

namespace vessel4d {

const char* tool_version() { return VESSEL4D_VERSION; }

void RunManifest::add_input(const std::filesystem::path& path) {
  if (std::filesystem::is_directory(path)) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(path)) {
      if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) inputs.emplace_back(f.string(), sha256_file(f));
    return;
  }
  inputs.emplace_back(path.string(), sha256_file(path));
}

void RunManifest::add_output(const std::filesystem::path& path) { outputs.emplace_back(path.string(), sha256_file(path)); }

Json RunManifest::to_json() const {
  const auto files = [](const std::vector<std::pair<std::string, std::string>>& list) {
    Json out = Json::array();
    for (const auto& [path, digest] : list) out.push_back({{"path", path}, {"sha256", digest}});
    return out;
  };
  Json timing = Json::array();
  for (const auto& [stage, seconds] : timings) timing.push_back({{"stage", stage}, {"seconds", seconds}});
  return Json{{"tool", "vessel4d"},
              {"version", tool_version()},
              {"subcommand", subcommand},
              {"config", config},
              {"inputs", files(inputs)},
              {"outputs", files(outputs)},
              {"timings", std::move(timing)}};
}

}  // namespace vessel4d
