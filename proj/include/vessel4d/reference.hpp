#pragma once

// Serial, brute-force counterparts of the parallel and indexed kernels.
// Kept for tests and benchmarks only.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "vessel4d/cluster.hpp"
#include "vessel4d/coherence.hpp"
#include "vessel4d/eval.hpp"
#include "vessel4d/graph.hpp"
#include "vessel4d/metrics.hpp"

namespace vessel4d::reference {

std::vector<double> nearest_distances(std::span<const Vec3> from, std::span<const Vec3> to);
ChamferResult chamfer(std::span<const Vec3> pred, std::span<const Vec3> gt);
OverlapScore precision_recall_f(std::span<const Vec3> pred, std::span<const Vec3> gt, double tau);

/// O(n^2) eps-graph, core components by union-find, borders to the
/// component with the lowest core index, numbered by lowest member.
DbscanResult dbscan(std::span<const Vec3> points, double eps, int min_pts);

CentroidTracks track_centroids(const PrimitiveSequence& seq, const ClusterAssignment& assignment);

/// Edge-list formulation of the Jacobi pass, one frame at a time.
DisplacementField smooth_field(const DisplacementField& field, const EdgeGraph& graph, const CoherenceParams& params);

StressField edge_stress(std::span<const Edge> edges, std::span<const Vec3> positions, std::size_t vertex_count,
                        double mu);

/// True when no input point lies strictly inside any tetrahedron's circumsphere
/// (exact arithmetic).
bool is_delaunay(std::span<const Vec3> points, std::span<const std::array<std::uint32_t, 4>> tetrahedra);

}  // namespace vessel4d::reference
