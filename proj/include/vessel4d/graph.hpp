#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vessel4d/cluster.hpp"
#include "vessel4d/ingest.hpp"
#include "vessel4d/types.hpp"

namespace vessel4d {

/// Fixed vertex set with per-frame centroid trajectories and a static edge set.
///
/// Storage is frame-major: `centroids[t * K + k]`. The JSON form is vertex-major
/// (K x T x 3) and is converted on read/write.
struct EdgeGraph {
  std::vector<std::int64_t> vertex_ids;  // stable label per vertex (cluster index before curation)
  std::size_t frame_count = 0;
  std::vector<Vec3> centroids;
  std::vector<std::uint32_t> member_counts;  // |I_k| per frame, frame-major
  std::vector<Edge> edges;                   // sorted, unique, i < j
  bool curated = false;

  std::size_t vertex_count() const { return vertex_ids.size(); }
  const Vec3& position(std::size_t k, std::size_t t) const { return centroids[t * vertex_count() + k]; }
  std::uint32_t members(std::size_t k, std::size_t t) const { return member_counts[t * vertex_count() + k]; }
  std::span<const Vec3> frame_positions(std::size_t t) const {
    return {centroids.data() + t * vertex_count(), vertex_count()};
  }

  bool operator==(const EdgeGraph&) const = default;
};

/// Throws InvariantError when indices, sizes or edge ordering are inconsistent.
void validate_graph(const EdgeGraph& graph);

/// Compressed neighbor lists derived from an edge set.
struct Adjacency {
  std::vector<std::uint32_t> offsets;  // size K + 1
  std::vector<std::uint32_t> neighbors;

  static Adjacency from_edges(std::size_t vertex_count, std::span<const Edge> edges);
  std::span<const std::uint32_t> of(std::size_t k) const {
    return {neighbors.data() + offsets[k], offsets[k + 1] - offsets[k]};
  }
  std::size_t degree(std::size_t k) const { return offsets[k + 1] - offsets[k]; }
};

struct CentroidTracks {
  std::size_t vertex_count = 0;
  std::size_t frame_count = 0;
  std::vector<Vec3> centroids;               // frame-major
  std::vector<std::uint32_t> member_counts;  // frame-major
};

/// Per-frame centroid of each cluster's observed members. A cluster with no
/// observed member in frame t keeps its frame t-1 position (count 0).
/// Frames are processed in parallel.
CentroidTracks track_centroids(const PrimitiveSequence& seq, const ClusterAssignment& assignment);

/// Delaunay candidate edges over `x0`, kept when length <= mean + gamma * sd
/// (population sd over candidates).
std::vector<Edge> build_edges(std::span<const Vec3> x0, double gamma);

struct EdgeLengthStats {
  double mean = 0.0;
  double sd = 0.0;
  double threshold = 0.0;
};

/// The pruning rule applied to an explicit list of candidate lengths.
EdgeLengthStats pruning_threshold(std::span<const double> lengths, double gamma);

/// Clusters -> centroid tracks -> pruned Delaunay edges.
EdgeGraph build_graph(const PrimitiveSequence& seq, const ClusterAssignment& assignment, double gamma);

struct CurationEdit {
  std::vector<std::uint32_t> removed_vertices;
  std::vector<Edge> removed_edges;
  std::vector<Edge> added_edges;

  bool empty() const { return removed_vertices.empty() && removed_edges.empty() && added_edges.empty(); }
  bool operator==(const CurationEdit&) const = default;
};

inline constexpr std::int64_t kRemovedVertex = -1;

struct CurationResult {
  EdgeGraph graph;
  std::vector<std::int64_t> old_to_new;  // kRemovedVertex for removed vertices
};

/// Applies a one-time edit against the pre-edit indices and locks the
/// topology (curated = true). A curated graph accepts only edits that are
/// no-ops against it; anything else throws CurationError.
CurationResult apply_curation(const EdgeGraph& graph, const CurationEdit& edit);

/// Expresses `edit` in post-curation indices, dropping everything the first
/// application already consumed. Applying the result to the curated graph
/// is the identity.
CurationEdit remap_edit(const CurationEdit& edit, std::span<const std::int64_t> old_to_new);

/// Hex digest of vertex ids and edge set; used to assert topology locking.
std::string topology_hash(const EdgeGraph& graph);

}  // namespace vessel4d
