#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vessel4d/coherence.hpp"
#include "vessel4d/graph.hpp"
#include "vessel4d/graph_io.hpp"
#include "vessel4d/types.hpp"

namespace vessel4d {

struct MaterialParams {
  double youngs_modulus_mpa = 1.15;
  double poisson_ratio = 0.5;

  double shear_modulus_mpa() const { return youngs_modulus_mpa / (2.0 * (1.0 + poisson_ratio)); }
};

void validate_material(const MaterialParams& material);

/// mu * (lambda^2 - 1/lambda).
inline double neo_hookean_stress(double stretch, double mu) { return mu * (stretch * stretch - 1.0 / stretch); }

/// Signed edge stress, frame-major `sigma[t * E + e]`, MPa.
struct StressField {
  std::size_t edge_count = 0;
  std::size_t frame_count = 0;
  std::vector<double> sigma;

  double at(std::size_t e, std::size_t t) const { return sigma[t * edge_count + e]; }
  bool operator==(const StressField&) const = default;
};

/// Stretch of each edge against its frame-0 length over frame-major
/// positions (K per frame). Edges run in parallel.
StressField edge_stress(std::span<const Edge> edges, std::span<const Vec3> positions, std::size_t vertex_count,
                        double mu);

/// Positions are reconstituted as x_k(0) + u_k(t).
StressField edge_stress(const EdgeGraph& graph, const DisplacementField& field, double mu);

struct RoiSpec {
  enum class Kind { index_list, sphere };

  std::string name;
  Kind kind = Kind::index_list;
  std::vector<std::int64_t> vertex_ids;  // index_list: graph vertex ids
  Vec3 center = Vec3::Zero();            // sphere, mm
  double radius = 0.0;                   // sphere, mm; inclusive
};

Json roi_to_json(const RoiSpec& roi);
RoiSpec roi_from_json(const Json& j);
/// Accepts a bare array or `{"rois": [...]}`.
std::vector<RoiSpec> rois_from_json(const Json& j);
Json rois_to_json(std::span<const RoiSpec> rois);

struct ResolvedRoi {
  std::string name;
  std::vector<std::uint32_t> vertices;  // ascending vertex indices
  std::vector<std::uint32_t> edges;     // indices into graph.edges with both endpoints inside
};

/// Vertex set of a ROI on `graph`; spheres use frame-0 centroids.
ResolvedRoi resolve_roi(const RoiSpec& roi, const EdgeGraph& graph);

/// Median displacement magnitude over the ROI vertices, per frame.
std::vector<double> roi_displacement_series(const DisplacementField& field, const ResolvedRoi& roi);

/// Median |sigma| over the ROI's interior edges, per frame.
std::vector<double> roi_stress_series(const StressField& stress, const ResolvedRoi& roi);

double series_max(std::span<const double> series);

struct RoiMetrics {
  std::string name;
  std::vector<double> displacement_med_mm;
  std::vector<double> stress_med_mpa;
  double displacement_max_mm = 0.0;
  double stress_max_mpa = 0.0;
};

std::vector<RoiMetrics> compute_roi_metrics(const EdgeGraph& graph, const DisplacementField& field,
                                            const StressField& stress, std::span<const RoiSpec> rois);

/// Per-frame rows `roi,frame,d_med_mm,stress_med_mpa`, a blank line, then
/// summary rows `roi,d_max_mm,stress_max_mpa`.
std::string format_metrics_csv(std::span<const RoiMetrics> metrics);

}  // namespace vessel4d
