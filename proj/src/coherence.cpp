#include "vessel4d/coherence.hpp"

#include <cmath>

#include "vessel4d/error.hpp"
#include "vessel4d/spatial.hpp"
#include "vessel4d/stats.hpp"

namespace vessel4d {

DisplacementField displacement_from_graph(const EdgeGraph& graph) {
  DisplacementField field;
  field.vertex_count = graph.vertex_count();
  field.frame_count = graph.frame_count;
  field.u.resize(graph.centroids.size());
  for (std::size_t t = 0; t < graph.frame_count; ++t) {
    for (std::size_t k = 0; k < field.vertex_count; ++k) field.at(k, t) = graph.position(k, t) - graph.position(k, 0);
  }
  return field;
}

std::vector<Vec3> positions_from_displacement(const EdgeGraph& graph, const DisplacementField& field) {
  if (field.vertex_count != graph.vertex_count() || field.frame_count != graph.frame_count) {
    throw InvariantError("displacement field does not match the graph");
  }
  std::vector<Vec3> x(field.u.size());
  for (std::size_t t = 0; t < field.frame_count; ++t) {
    for (std::size_t k = 0; k < field.vertex_count; ++k) x[t * field.vertex_count + k] = graph.position(k, 0) + field.at(k, t);
  }
  return x;
}

void validate_coherence_params(const CoherenceParams& params) {
  if (!(params.alpha > 0.0 && params.alpha <= 1.0)) throw ConfigError("coherence.alpha must be in (0, 1]");
  if (!(params.kappa > 0.0) || !std::isfinite(params.kappa)) throw ConfigError("coherence.kappa must be > 0");
  if (params.iterations < 0) throw ConfigError("coherence.iterations must be >= 0");
  if (!(params.epsilon >= 0.0) || !std::isfinite(params.epsilon)) throw ConfigError("coherence.epsilon must be >= 0");
}

double mad_scale(std::span<const double> residuals, double epsilon) {
  if (residuals.empty()) throw EmptyResultError("MAD scale: no residuals");
  const double m = median(residuals);
  std::vector<double> dev(residuals.size());
  for (std::size_t i = 0; i < dev.size(); ++i) dev[i] = std::abs(residuals[i] - m);
  return median(dev) + epsilon;
}

std::vector<Vec3> smooth_frame(std::span<const Vec3> u, std::span<const Edge> edges, const Adjacency& adjacency,
                               std::span<const std::uint8_t> updatable, const CoherenceParams& params) {
  std::vector<Vec3> current(u.begin(), u.end());
  if (edges.empty()) return current;
  std::vector<Vec3> next(current.size());
  std::vector<double> residuals(edges.size());
  for (int it = 0; it < params.iterations; ++it) {
    double tau = 0.0;
    if (params.robust) {
      for (std::size_t e = 0; e < edges.size(); ++e) {
        residuals[e] = point_distance(current[edges[e].i], current[edges[e].j]);
      }
      tau = params.kappa * mad_scale(residuals, params.epsilon);
    }
    for (std::size_t k = 0; k < current.size(); ++k) {
      const auto nbrs = adjacency.of(k);
      if (nbrs.empty() || !updatable[k]) {
        next[k] = current[k];
        continue;
      }
      Vec3 acc = Vec3::Zero();
      double wsum = 0.0;
      for (auto j : nbrs) {
        const double w = params.robust ? robust_weight(point_distance(current[k], current[j]), tau, params.epsilon) : 1.0;
        acc += w * current[j];
        wsum += w;
      }
      next[k] = (1.0 - params.alpha) * current[k] + params.alpha * (acc / (wsum + params.epsilon));
    }
    current.swap(next);
  }
  return current;
}

DisplacementField smooth_field(const DisplacementField& field, const EdgeGraph& graph, const CoherenceParams& params,
                               SmoothStats* stats) {
  validate_coherence_params(params);
  if (field.vertex_count != graph.vertex_count() || field.frame_count != graph.frame_count) {
    throw InvariantError("smooth_field: displacement field does not match the graph");
  }
  const std::size_t k_count = field.vertex_count;
  const auto adjacency = Adjacency::from_edges(k_count, graph.edges);

  DisplacementField out = field;
  out.smoothed = true;
  const auto frames = static_cast<std::int64_t>(field.frame_count);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t t = 0; t < frames; ++t) {
    const auto tf = static_cast<std::size_t>(t);
    std::vector<std::uint8_t> updatable(k_count);
    for (std::size_t k = 0; k < k_count; ++k) updatable[k] = graph.members(k, tf) > 0 ? 1 : 0;
    const auto smoothed = smooth_frame(field.frame(tf), graph.edges, adjacency, updatable, params);
    std::copy(smoothed.begin(), smoothed.end(), out.u.begin() + static_cast<std::ptrdiff_t>(tf * k_count));
  }

  if (stats) {
    *stats = SmoothStats{};
    for (std::size_t k = 0; k < k_count; ++k) {
      if (adjacency.degree(k) == 0) ++stats->isolated_vertices;
    }
    if (params.iterations > 0 && !graph.edges.empty()) {
      for (std::size_t t = 0; t < field.frame_count; ++t) {
        for (std::size_t k = 0; k < k_count; ++k) {
          if (adjacency.degree(k) > 0 && graph.members(k, t) == 0) ++stats->frozen_updates;
        }
      }
    }
  }
  return out;
}

}  // namespace vessel4d
