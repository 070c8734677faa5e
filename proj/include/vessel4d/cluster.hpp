#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vessel4d/ingest.hpp"
#include "vessel4d/types.hpp"

namespace vessel4d {

inline constexpr int kNoise = -1;

struct KMeansResult {
  std::vector<int> labels;   // 0..groups-1
  std::vector<Vec3> centers; // size == groups; collapsed centers repeat
  int iterations = 0;
};

/// Lloyd's k-means with k-means++ seeding from `seed`. Ties go to the
/// lowest center index, so duplicate centers stay empty.
KMeansResult kmeans(std::span<const Vec3> values, int groups, std::uint64_t seed, int max_iterations = 300);

/// Color groups g_n of the frame-0 primitives.
KMeansResult kmeans_rgb(const PrimitiveSequence& seq, int groups, std::uint64_t seed);

struct DbscanResult {
  std::vector<int> labels;  // component index or kNoise
  int cluster_count = 0;
};

/// Classic DBSCAN: a point is core when its closed eps-ball (itself
/// included) holds at least min_pts points. A border point joins the
/// earliest-discovered adjacent cluster (discovery follows ascending index).
/// Components are numbered by their lowest member index.
DbscanResult dbscan(std::span<const Vec3> points, double eps, int min_pts);

struct ClusterParams {
  int color_groups = 5;
  double eps_mm = 0.7;
  int min_pts = 3;
  std::uint64_t seed = 0;
};

/// Frame-0 labels for every track of a sequence.
struct ClusterAssignment {
  std::vector<std::int64_t> track_ids;  // copy of PrimitiveSequence::ids
  std::vector<int> color_group;         // g_n
  std::vector<int> cluster;             // l_n in 0..K-1 or kNoise
  std::vector<Vec3> color_centers;
  int cluster_count = 0;                // K

  /// Member track indices per cluster, ascending.
  std::vector<std::vector<std::uint32_t>> members() const;
};

/// k-means in RGB, then DBSCAN on frame-0 positions inside each color group.
/// Clusters are numbered globally by their lowest member track index.
ClusterAssignment cluster_primitives(const PrimitiveSequence& seq, const ClusterParams& params);

}  // namespace vessel4d
