#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "vessel4d/cluster.hpp"
#include "vessel4d/graph.hpp"

namespace vessel4d {

using Json = nlohmann::json;

// Graph JSON:
//   {"vertices":[{"id":..,"x0":[x,y,z]}],
//    "centroids":{"frames":T,"data":[K*T*3, vertex-major]},
//    "member_counts":{"frames":T,"data":[K*T, vertex-major]},
//    "edges":[[i,j],...], "curated":bool}
// member_counts is optional on input (all ones when absent).
Json graph_to_json(const EdgeGraph& graph);
EdgeGraph graph_from_json(const Json& j);

// Curation edit JSON: {"removed_vertices":[..],"removed_edges":[[i,j]],"added_edges":[[i,j]]}
Json edit_to_json(const CurationEdit& edit);
CurationEdit edit_from_json(const Json& j);

Json assignment_to_json(const ClusterAssignment& a);
ClusterAssignment assignment_from_json(const Json& j);

Json read_json_file(const std::filesystem::path& path);
/// Writes `j.dump(indent)` plus a trailing newline.
void write_json_file(const std::filesystem::path& path, const Json& j, int indent = 1);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace vessel4d
