#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vessel4d/graph.hpp"
#include "vessel4d/types.hpp"

namespace vessel4d {

/// Per-vertex displacement relative to frame 0, frame-major `u[t * K + k]`.
struct DisplacementField {
  std::size_t vertex_count = 0;
  std::size_t frame_count = 0;
  std::vector<Vec3> u;
  bool smoothed = false;

  const Vec3& at(std::size_t k, std::size_t t) const { return u[t * vertex_count + k]; }
  Vec3& at(std::size_t k, std::size_t t) { return u[t * vertex_count + k]; }
  std::span<const Vec3> frame(std::size_t t) const { return {u.data() + t * vertex_count, vertex_count}; }

  bool operator==(const DisplacementField&) const = default;
};

/// u_k(t) = x_k(t) - x_k(0).
DisplacementField displacement_from_graph(const EdgeGraph& graph);

/// x_k(0) + u_k(t), frame-major.
std::vector<Vec3> positions_from_displacement(const EdgeGraph& graph, const DisplacementField& field);

struct CoherenceParams {
  double alpha = 0.1;
  double kappa = 2.5;
  int iterations = 1;
  double epsilon = 1e-12;
  bool robust = true;  // false: every weight is 1
};

void validate_coherence_params(const CoherenceParams& params);

/// median(|r - median(r)|) + epsilon.
double mad_scale(std::span<const double> residuals, double epsilon);

/// 1 when r <= tau, tau / (r + epsilon) otherwise.
inline double robust_weight(double r, double tau, double epsilon) { return r <= tau ? 1.0 : tau / (r + epsilon); }

struct SmoothStats {
  std::size_t isolated_vertices = 0;  // degree 0, never updated
  std::size_t frozen_updates = 0;     // (vertex, frame) pairs skipped for lack of members
};

/// One frame of coherence filtering. Each iteration recomputes residuals,
/// the MAD scale and weights from a frozen snapshot, then updates every
/// vertex with `updatable[k] != 0` and at least one neighbor.
std::vector<Vec3> smooth_frame(std::span<const Vec3> u, std::span<const Edge> edges, const Adjacency& adjacency,
                               std::span<const std::uint8_t> updatable, const CoherenceParams& params);

/// Smooths every frame of `field` on the graph's edge set. Vertices with
/// no members in a frame contribute as neighbors but keep their value.
/// Frames run in parallel.
DisplacementField smooth_field(const DisplacementField& field, const EdgeGraph& graph, const CoherenceParams& params,
                               SmoothStats* stats = nullptr);

}  // namespace vessel4d
