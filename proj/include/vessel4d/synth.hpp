#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include "vessel4d/coherence.hpp"
#include "vessel4d/graph.hpp"
#include "vessel4d/graph_io.hpp"
#include "vessel4d/ingest.hpp"
#include "vessel4d/metrics.hpp"

namespace vessel4d {

enum class SurfaceKind { tube, y_bifurcation };
enum class DeformationKind { bulk, pull };

SurfaceKind parse_surface_kind(std::string_view name);
DeformationKind parse_deformation_kind(std::string_view name);
const char* to_string(SurfaceKind kind);
const char* to_string(DeformationKind kind);

/// Beads are placed on the surface with a minimum spacing; each bead carries
/// a small blob of primitives sharing one saturated patch color and moving
/// rigidly with the bead.
struct SynthConfig {
  SurfaceKind surface = SurfaceKind::tube;
  std::size_t point_count = 5000;  // total primitives
  int primitives_per_bead = 20;
  double bead_spacing_mm = 1.5;
  double bead_spread_mm = 0.15;
  int color_count = 5;
  std::size_t frame_count = 10;
  DeformationKind condition = DeformationKind::pull;
  double pull_magnitude_mm = 5.0;
  std::optional<Vec3> pull_center;  // surface default when empty
  Vec3 pull_direction = Vec3::UnitZ();
  double falloff_radius_mm = 15.0;
  Vec3 translation_mm = Vec3(5.0, 0.0, 0.0);
  double roi_radius_mm = 3.0;
  double gamma = 0.25;
  MaterialParams material;
  // Degradation of the observed copy.
  double noise_sigma_mm = 0.0;
  double outlier_fraction = 0.0;
  double outlier_magnitude_mm = 0.0;
  std::uint64_t seed = 1;
};

void validate_synth_config(const SynthConfig& config);
Json synth_config_to_json(const SynthConfig& config);
/// Missing keys keep their defaults.
SynthConfig synth_config_from_json(const Json& j);

Vec3 default_pull_center(SurfaceKind surface);
Vec3 resolved_pull_center(const SynthConfig& config);

/// Five sphere ROIs; R1 sits on the pull center.
std::vector<RoiSpec> default_rois(const SynthConfig& config);

/// 1 - (3x^2 - 2x^3) with x = d / radius, clamped to [0, 1].
double smoothstep_falloff(double distance, double radius);

/// Displacement of a frame-0 point at frame t.
Vec3 synth_displacement(const SynthConfig& config, const Vec3& x0, std::size_t frame);

struct GroundTruth {
  SynthConfig config;
  PrimitiveSequence sequence;           // clean
  std::vector<std::uint32_t> bead_of_track;
  EdgeGraph graph;                      // vertices are beads
  DisplacementField displacement;
  StressField stress;
  std::vector<RoiSpec> rois;
};

GroundTruth generate(const SynthConfig& config);

struct DegradeParams {
  double noise_sigma_mm = 0.0;
  double outlier_fraction = 0.0;
  double outlier_magnitude_mm = 0.0;
  std::uint64_t seed = 1;
};

struct Degraded {
  PrimitiveSequence sequence;
  std::vector<std::uint32_t> spiked_tracks;  // ascending track indices
};

/// Gaussian jitter on every position of every frame, plus a fixed random
/// spike on floor(fraction * N) tracks at every frame t > 0.
Degraded degrade(const PrimitiveSequence& clean, const DegradeParams& params);

DegradeParams degrade_params(const SynthConfig& config);
bool degrades(const SynthConfig& config);

/// Bundle layout: sequence.csv, gt_graph.json, gt_displacement.csv,
/// gt_stress.csv, rois.json, config.json and observed.csv when degraded.
void write_bundle(const std::filesystem::path& dir, const GroundTruth& gt, const PrimitiveSequence* observed);

struct Bundle {
  SynthConfig config;
  PrimitiveSequence sequence;
  std::optional<PrimitiveSequence> observed;
  EdgeGraph graph;
  DisplacementField displacement;
  StressField stress;
  std::vector<RoiSpec> rois;
};

Bundle read_bundle(const std::filesystem::path& dir);

}  // namespace vessel4d
