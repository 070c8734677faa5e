#include "vessel4d/graph.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "vessel4d/delaunay.hpp"
#include "vessel4d/error.hpp"
#include "vessel4d/hash.hpp"
#include "vessel4d/spatial.hpp"

namespace vessel4d {

void validate_graph(const EdgeGraph& graph) {
  const std::size_t k = graph.vertex_count();
  if (graph.frame_count == 0) throw InvariantError("graph: frame_count must be >= 1");
  if (graph.centroids.size() != k * graph.frame_count) throw InvariantError("graph: centroid array size mismatch");
  if (graph.member_counts.size() != k * graph.frame_count) {
    throw InvariantError("graph: member count array size mismatch");
  }
  for (const auto& c : graph.centroids) {
    if (!c.allFinite()) throw InvariantError("graph: non-finite centroid");
  }
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    const auto& edge = graph.edges[e];
    if (edge.i >= edge.j || edge.j >= k) {
      throw InvariantError("graph: invalid edge (" + std::to_string(edge.i) + "," + std::to_string(edge.j) + ")");
    }
    if (e > 0 && !(graph.edges[e - 1] < edge)) throw InvariantError("graph: edges must be sorted and unique");
  }
}

Adjacency Adjacency::from_edges(std::size_t vertex_count, std::span<const Edge> edges) {
  Adjacency adj;
  adj.offsets.assign(vertex_count + 1, 0);
  for (const auto& e : edges) {
    ++adj.offsets[e.i + 1];
    ++adj.offsets[e.j + 1];
  }
  for (std::size_t k = 0; k < vertex_count; ++k) adj.offsets[k + 1] += adj.offsets[k];
  adj.neighbors.resize(adj.offsets.back());
  std::vector<std::uint32_t> fill(adj.offsets.begin(), adj.offsets.end() - 1);
  for (const auto& e : edges) {
    adj.neighbors[fill[e.i]++] = e.j;
    adj.neighbors[fill[e.j]++] = e.i;
  }
  for (std::size_t k = 0; k < vertex_count; ++k) {
    std::sort(adj.neighbors.begin() + adj.offsets[k], adj.neighbors.begin() + adj.offsets[k + 1]);
  }
  return adj;
}

CentroidTracks track_centroids(const PrimitiveSequence& seq, const ClusterAssignment& assignment) {
  if (assignment.cluster.size() != seq.track_count()) {
    throw InvariantError("track_centroids: assignment does not match the sequence's tracks");
  }
  const auto members = assignment.members();
  const std::size_t k_count = members.size();
  const std::size_t t_count = seq.frame_count();
  for (std::size_t k = 0; k < k_count; ++k) {
    bool any = false;
    for (auto n : members[k]) any = any || seq.frames[0].is_observed(n);
    if (!any) throw GeometryError("track_centroids: cluster " + std::to_string(k) + " is empty at frame 0");
  }

  CentroidTracks out;
  out.vertex_count = k_count;
  out.frame_count = t_count;
  out.centroids.assign(k_count * t_count, Vec3::Zero());
  out.member_counts.assign(k_count * t_count, 0);

  const auto frames = static_cast<std::int64_t>(t_count);
#pragma omp parallel for schedule(static)
  for (std::int64_t t = 0; t < frames; ++t) {
    const auto& frame = seq.frames[static_cast<std::size_t>(t)];
    for (std::size_t k = 0; k < k_count; ++k) {
      Vec3 sum = Vec3::Zero();
      std::uint32_t count = 0;
      for (auto n : members[k]) {
        if (!frame.is_observed(n)) continue;
        sum += frame.primitives[n].position;
        ++count;
      }
      const std::size_t slot = static_cast<std::size_t>(t) * k_count + k;
      out.member_counts[slot] = count;
      if (count > 0) out.centroids[slot] = sum / static_cast<double>(count);
    }
  }
  // Carry-forward is sequential in t.
  for (std::size_t t = 1; t < t_count; ++t) {
    for (std::size_t k = 0; k < k_count; ++k) {
      if (out.member_counts[t * k_count + k] == 0) out.centroids[t * k_count + k] = out.centroids[(t - 1) * k_count + k];
    }
  }
  return out;
}

EdgeLengthStats pruning_threshold(std::span<const double> lengths, double gamma) {
  if (lengths.empty()) throw GeometryError("edge pruning: no candidate edges");
  // Sum in sorted order so the statistics depend only on the multiset.
  std::vector<double> sorted(lengths.begin(), lengths.end());
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (double d : sorted) sum += d;
  EdgeLengthStats stats;
  stats.mean = sum / static_cast<double>(sorted.size());
  double sq = 0.0;
  for (double d : sorted) sq += (d - stats.mean) * (d - stats.mean);
  stats.sd = std::sqrt(sq / static_cast<double>(sorted.size()));
  stats.threshold = stats.mean + gamma * stats.sd;
  return stats;
}

std::vector<Edge> build_edges(std::span<const Vec3> x0, double gamma) {
  if (!std::isfinite(gamma)) throw ConfigError("build_edges: gamma must be finite");
  const auto candidates = delaunay_edges(x0);
  std::vector<double> lengths;
  lengths.reserve(candidates.size());
  for (const auto& e : candidates) lengths.push_back(point_distance(x0[e.i], x0[e.j]));
  const auto stats = pruning_threshold(lengths, gamma);
  // Equal-length candidates can differ by an ulp after sqrt; keep them together.
  const double limit = stats.threshold + 1e-12 * stats.mean;
  std::vector<Edge> kept;
  kept.reserve(candidates.size());
  for (std::size_t e = 0; e < candidates.size(); ++e) {
    if (lengths[e] <= limit) kept.push_back(candidates[e]);
  }
  return kept;
}

EdgeGraph build_graph(const PrimitiveSequence& seq, const ClusterAssignment& assignment, double gamma) {
  auto tracks = track_centroids(seq, assignment);
  EdgeGraph graph;
  graph.vertex_ids.resize(tracks.vertex_count);
  for (std::size_t k = 0; k < tracks.vertex_count; ++k) graph.vertex_ids[k] = static_cast<std::int64_t>(k);
  graph.frame_count = tracks.frame_count;
  graph.centroids = std::move(tracks.centroids);
  graph.member_counts = std::move(tracks.member_counts);
  graph.edges = build_edges(graph.frame_positions(0), gamma);
  return graph;
}

namespace {

bool has_edge(const std::vector<Edge>& sorted_edges, const Edge& e) {
  return std::binary_search(sorted_edges.begin(), sorted_edges.end(), e);
}

void check_edge_ref(const Edge& e, std::size_t k, const char* what) {
  if (e.i == e.j) {
    throw CurationError(std::string(what) + ": self-edge (" + std::to_string(e.i) + "," + std::to_string(e.j) + ")");
  }
  if (e.i >= k || e.j >= k) {
    throw CurationError(std::string(what) + ": dangling reference (" + std::to_string(e.i) + "," +
                        std::to_string(e.j) + ")");
  }
}

}  // namespace

CurationResult apply_curation(const EdgeGraph& graph, const CurationEdit& edit) {
  const std::size_t k = graph.vertex_count();
  CurationResult result;

  if (graph.curated) {
    if (!edit.empty()) throw CurationError("graph topology is locked (already curated); edit is not a no-op");
    result.graph = graph;
    result.old_to_new.resize(k);
    for (std::size_t v = 0; v < k; ++v) result.old_to_new[v] = static_cast<std::int64_t>(v);
    return result;
  }

  std::vector<bool> removed(k, false);
  for (auto v : edit.removed_vertices) {
    if (v >= k) throw CurationError("removed vertex " + std::to_string(v) + ": dangling reference");
    removed[v] = true;
  }
  std::set<Edge> drop;
  for (const auto& raw : edit.removed_edges) {
    const Edge e = Edge::make(raw.i, raw.j);
    check_edge_ref(e, k, "removed edge");
    if (!has_edge(graph.edges, e)) {
      throw CurationError("removed edge (" + std::to_string(e.i) + "," + std::to_string(e.j) +
                          "): dangling reference (not in graph)");
    }
    drop.insert(e);
  }

  std::vector<Edge> kept;
  for (const auto& e : graph.edges) {
    if (removed[e.i] || removed[e.j] || drop.count(e)) continue;
    kept.push_back(e);
  }
  std::set<Edge> added;
  for (const auto& raw : edit.added_edges) {
    const Edge e = Edge::make(raw.i, raw.j);
    check_edge_ref(e, k, "added edge");
    if (removed[e.i] || removed[e.j]) {
      throw CurationError("added edge (" + std::to_string(e.i) + "," + std::to_string(e.j) +
                          "): dangling reference (endpoint removed)");
    }
    if (has_edge(kept, e) || !added.insert(e).second) {
      throw CurationError("added edge (" + std::to_string(e.i) + "," + std::to_string(e.j) + "): duplicate edge");
    }
  }

  result.old_to_new.assign(k, kRemovedVertex);
  std::int64_t next = 0;
  for (std::size_t v = 0; v < k; ++v) {
    if (!removed[v]) result.old_to_new[v] = next++;
  }
  const auto k_new = static_cast<std::size_t>(next);
  if (k_new == 0) throw CurationError("curation removes every vertex");

  EdgeGraph& out = result.graph;
  out.frame_count = graph.frame_count;
  out.curated = true;
  out.vertex_ids.reserve(k_new);
  for (std::size_t v = 0; v < k; ++v) {
    if (!removed[v]) out.vertex_ids.push_back(graph.vertex_ids[v]);
  }
  out.centroids.reserve(k_new * graph.frame_count);
  out.member_counts.reserve(k_new * graph.frame_count);
  for (std::size_t t = 0; t < graph.frame_count; ++t) {
    for (std::size_t v = 0; v < k; ++v) {
      if (removed[v]) continue;
      out.centroids.push_back(graph.position(v, t));
      out.member_counts.push_back(graph.members(v, t));
    }
  }
  const auto remap = [&](const Edge& e) {
    return Edge::make(static_cast<std::uint32_t>(result.old_to_new[e.i]),
                      static_cast<std::uint32_t>(result.old_to_new[e.j]));
  };
  for (const auto& e : kept) out.edges.push_back(remap(e));
  for (const auto& e : added) out.edges.push_back(remap(e));
  std::sort(out.edges.begin(), out.edges.end());
  return result;
}

CurationEdit remap_edit(const CurationEdit& edit, std::span<const std::int64_t> old_to_new) {
  // Everything an applied edit names has been consumed: removed vertices and
  // edges no longer exist, added edges already do. Only references to
  // unknown indices survive, so that replaying a foreign edit still fails.
  CurationEdit out;
  const auto known = [&](std::uint32_t v) { return v < old_to_new.size(); };
  for (auto v : edit.removed_vertices) {
    if (!known(v)) out.removed_vertices.push_back(v);
  }
  for (const auto& e : edit.removed_edges) {
    if (!known(e.i) || !known(e.j)) out.removed_edges.push_back(e);
  }
  for (const auto& e : edit.added_edges) {
    if (!known(e.i) || !known(e.j)) out.added_edges.push_back(e);
  }
  return out;
}

std::string topology_hash(const EdgeGraph& graph) {
  std::string text = "K=" + std::to_string(graph.vertex_count()) + ";ids=";
  for (auto id : graph.vertex_ids) text += std::to_string(id) + ",";
  text += ";E=";
  for (const auto& e : graph.edges) text += std::to_string(e.i) + "-" + std::to_string(e.j) + ",";
  return sha256_hex(text);
}

}  // namespace vessel4d
