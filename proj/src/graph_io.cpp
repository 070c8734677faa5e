#include "vessel4d/graph_io.hpp"

#include <algorithm>
#include <fstream>

#include "vessel4d/error.hpp"

namespace vessel4d {
namespace {

Json vec_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from(const Json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw ParseError(std::string(what) + ": expected [x,y,z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Edge edge_from(const Json& j, const char* what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer()) {
    throw ParseError(std::string(what) + ": expected [i,j] integer pair");
  }
  const auto a = j[0].get<std::int64_t>(), b = j[1].get<std::int64_t>();
  if (a < 0 || b < 0) throw ParseError(std::string(what) + ": negative vertex index");
  return Edge{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
}

const Json& require(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(std::string("missing key '") + key + "'");
  return j.at(key);
}

}  // namespace

Json graph_to_json(const EdgeGraph& graph) {
  const std::size_t k_count = graph.vertex_count();
  const std::size_t t_count = graph.frame_count;
  Json vertices = Json::array();
  for (std::size_t k = 0; k < k_count; ++k) {
    vertices.push_back({{"id", graph.vertex_ids[k]}, {"x0", vec_json(graph.position(k, 0))}});
  }
  Json data = Json::array();
  Json counts = Json::array();
  for (std::size_t k = 0; k < k_count; ++k) {
    for (std::size_t t = 0; t < t_count; ++t) {
      const auto& p = graph.position(k, t);
      data.push_back(p.x());
      data.push_back(p.y());
      data.push_back(p.z());
      counts.push_back(graph.members(k, t));
    }
  }
  Json edges = Json::array();
  for (const auto& e : graph.edges) edges.push_back(Json::array({e.i, e.j}));
  Json out;
  out["vertices"] = std::move(vertices);
  out["centroids"] = {{"frames", t_count}, {"data", std::move(data)}};
  out["member_counts"] = {{"frames", t_count}, {"data", std::move(counts)}};
  out["edges"] = std::move(edges);
  out["curated"] = graph.curated;
  return out;
}

EdgeGraph graph_from_json(const Json& j) {
  try {
    EdgeGraph graph;
    const auto& vertices = require(j, "vertices");
    const auto& centroids = require(j, "centroids");
    graph.frame_count = require(centroids, "frames").get<std::size_t>();
    const auto& data = require(centroids, "data");
    const std::size_t k_count = vertices.size();
    const std::size_t t_count = graph.frame_count;
    if (data.size() != k_count * t_count * 3) {
      throw ParseError("graph: centroids.data has " + std::to_string(data.size()) + " values, expected " +
                       std::to_string(k_count * t_count * 3));
    }
    graph.vertex_ids.reserve(k_count);
    for (const auto& v : vertices) graph.vertex_ids.push_back(require(v, "id").get<std::int64_t>());
    graph.centroids.resize(k_count * t_count);
    for (std::size_t k = 0; k < k_count; ++k) {
      for (std::size_t t = 0; t < t_count; ++t) {
        const std::size_t base = (k * t_count + t) * 3;
        graph.centroids[t * k_count + k] =
            Vec3(data[base].get<double>(), data[base + 1].get<double>(), data[base + 2].get<double>());
      }
    }
    graph.member_counts.assign(k_count * t_count, 1);
    if (j.contains("member_counts")) {
      const auto& mc = require(j["member_counts"], "data");
      if (mc.size() != k_count * t_count) throw ParseError("graph: member_counts.data has wrong length");
      for (std::size_t k = 0; k < k_count; ++k) {
        for (std::size_t t = 0; t < t_count; ++t) {
          graph.member_counts[t * k_count + k] = mc[k * t_count + t].get<std::uint32_t>();
        }
      }
    }
    for (const auto& e : require(j, "edges")) {
      const Edge raw = edge_from(e, "edges");
      graph.edges.push_back(Edge::make(raw.i, raw.j));
    }
    std::sort(graph.edges.begin(), graph.edges.end());
    graph.curated = j.value("curated", false);
    validate_graph(graph);
    return graph;
  } catch (const Json::exception& e) {
    throw ParseError(std::string("graph JSON: ") + e.what());
  }
}

Json edit_to_json(const CurationEdit& edit) {
  Json out;
  out["removed_vertices"] = edit.removed_vertices;
  Json removed = Json::array(), added = Json::array();
  for (const auto& e : edit.removed_edges) removed.push_back(Json::array({e.i, e.j}));
  for (const auto& e : edit.added_edges) added.push_back(Json::array({e.i, e.j}));
  out["removed_edges"] = std::move(removed);
  out["added_edges"] = std::move(added);
  return out;
}

CurationEdit edit_from_json(const Json& j) {
  try {
    if (!j.is_object()) throw ParseError("curation edit: expected a JSON object");
    CurationEdit edit;
    if (j.contains("removed_vertices")) {
      for (const auto& v : j["removed_vertices"]) {
        if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
          throw ParseError("curation edit: removed_vertices must be non-negative integers");
        }
        edit.removed_vertices.push_back(v.get<std::uint32_t>());
      }
    }
    if (j.contains("removed_edges")) {
      for (const auto& e : j["removed_edges"]) edit.removed_edges.push_back(edge_from(e, "removed_edges"));
    }
    if (j.contains("added_edges")) {
      for (const auto& e : j["added_edges"]) edit.added_edges.push_back(edge_from(e, "added_edges"));
    }
    return edit;
  } catch (const Json::exception& e) {
    throw ParseError(std::string("curation edit JSON: ") + e.what());
  }
}

Json assignment_to_json(const ClusterAssignment& a) {
  Json centers = Json::array();
  for (const auto& c : a.color_centers) centers.push_back(vec_json(c));
  return Json{{"track_ids", a.track_ids},          {"color_group", a.color_group}, {"cluster", a.cluster},
              {"color_centers", std::move(centers)}, {"K", a.cluster_count}};
}

ClusterAssignment assignment_from_json(const Json& j) {
  try {
    ClusterAssignment a;
    a.track_ids = require(j, "track_ids").get<std::vector<std::int64_t>>();
    a.color_group = require(j, "color_group").get<std::vector<int>>();
    a.cluster = require(j, "cluster").get<std::vector<int>>();
    a.cluster_count = require(j, "K").get<int>();
    if (j.contains("color_centers")) {
      for (const auto& c : j["color_centers"]) a.color_centers.push_back(vec_from(c, "color_centers"));
    }
    if (a.color_group.size() != a.track_ids.size() || a.cluster.size() != a.track_ids.size()) {
      throw ParseError("cluster assignment: array lengths differ");
    }
    for (int c : a.cluster) {
      if (c < kNoise || c >= a.cluster_count) throw ParseError("cluster assignment: label out of range");
    }
    return a;
  } catch (const Json::exception& e) {
    throw ParseError(std::string("cluster assignment JSON: ") + e.what());
  }
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << text;
}

void write_json_file(const std::filesystem::path& path, const Json& j, int indent) {
  write_text_file(path, j.dump(indent) + "\n");
}

}  // namespace vessel4d
