#include "vessel4d/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "vessel4d/error.hpp"
#include "vessel4d/field_io.hpp"
#include "vessel4d/spatial.hpp"

namespace vessel4d {
namespace {

struct TubeSegment {
  Vec3 origin;
  Vec3 axis;  // unit
  double length = 0.0;
  double radius = 0.0;
  Vec3 e1, e2;

  Vec3 point(double s, double theta) const {
    return origin + s * axis + radius * (std::cos(theta) * e1 + std::sin(theta) * e2);
  }
  bool strictly_inside(const Vec3& p) const {
    const Vec3 d = p - origin;
    const double s = d.dot(axis);
    if (s <= 0.0 || s >= length) return false;
    return (d - s * axis).norm() < radius - 1e-9;
  }
  double area() const { return 2.0 * std::numbers::pi * radius * length; }
};

TubeSegment make_segment(const Vec3& origin, const Vec3& axis, double length, double radius) {
  TubeSegment seg;
  seg.origin = origin;
  seg.axis = axis.normalized();
  seg.length = length;
  seg.radius = radius;
  seg.e2 = Vec3::UnitZ();
  seg.e1 = seg.e2.cross(seg.axis).normalized();
  seg.e2 = seg.axis.cross(seg.e1);
  return seg;
}

constexpr double kTubeRadius = 3.0;
constexpr double kTubeLength = 60.0;
constexpr double kTrunkLength = 30.0;
constexpr double kBranchLength = 30.0;
constexpr double kBranchRadius = 2.4;
constexpr double kBranchAngleDeg = 35.0;

std::vector<TubeSegment> surface_segments(SurfaceKind kind) {
  if (kind == SurfaceKind::tube) {
    return {make_segment(Vec3::Zero(), Vec3::UnitX(), kTubeLength, kTubeRadius)};
  }
  const double a = kBranchAngleDeg * std::numbers::pi / 180.0;
  return {make_segment(Vec3(-kTrunkLength, 0, 0), Vec3::UnitX(), kTrunkLength, kTubeRadius),
          make_segment(Vec3::Zero(), Vec3(std::cos(a), std::sin(a), 0), kBranchLength, kBranchRadius),
          make_segment(Vec3::Zero(), Vec3(std::cos(a), -std::sin(a), 0), kBranchLength, kBranchRadius)};
}

Vec3 branch_axis(int sign) {
  const double a = kBranchAngleDeg * std::numbers::pi / 180.0;
  return Vec3(std::cos(a), sign * std::sin(a), 0);
}

const std::array<Vec3, 6> kPalette = {Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1),
                                      Vec3(1, 1, 0), Vec3(1, 0, 1), Vec3(0, 1, 1)};

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Dart throwing on the union surface with a minimum pairwise spacing.
std::vector<Vec3> place_beads(const SynthConfig& config, std::size_t count, std::mt19937_64& rng) {
  const auto segments = surface_segments(config.surface);
  std::vector<double> areas;
  for (const auto& s : segments) areas.push_back(s.area());
  std::discrete_distribution<std::size_t> pick(areas.begin(), areas.end());
  const double min_sq = config.bead_spacing_mm * config.bead_spacing_mm;
  const std::size_t max_attempts = 2000 * count + 10000;

  std::vector<Vec3> beads;
  beads.reserve(count);
  for (std::size_t attempt = 0; attempt < max_attempts && beads.size() < count; ++attempt) {
    const std::size_t si = pick(rng);
    const auto& seg = segments[si];
    const Vec3 p = seg.point(uniform(rng, 0.0, seg.length), uniform(rng, 0.0, 2.0 * std::numbers::pi));
    bool ok = true;
    for (std::size_t o = 0; o < segments.size() && ok; ++o) ok = o == si || !segments[o].strictly_inside(p);
    for (std::size_t b = 0; b < beads.size() && ok; ++b) ok = point_distance_sq(beads[b], p) >= min_sq;
    if (ok) beads.push_back(p);
  }
  if (beads.size() < count) {
    throw ConfigError("synth: cannot place " + std::to_string(count) + " beads " +
                      std::to_string(config.bead_spacing_mm) + " mm apart; lower point_count or raise primitives_per_bead");
  }
  return beads;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

Json vec_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from(const Json& j, const char* key) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 3) throw ConfigError(std::string("synth config: ") + key + " must have 3 components");
  return Vec3(v[0], v[1], v[2]);
}

}  // namespace

SurfaceKind parse_surface_kind(std::string_view name) {
  if (name == "tube") return SurfaceKind::tube;
  if (name == "y_bifurcation") return SurfaceKind::y_bifurcation;
  throw ConfigError("unknown surface '" + std::string(name) + "' (tube, y_bifurcation)");
}

DeformationKind parse_deformation_kind(std::string_view name) {
  if (name == "bulk") return DeformationKind::bulk;
  if (name == "pull") return DeformationKind::pull;
  throw ConfigError("unknown condition '" + std::string(name) + "' (bulk, pull)");
}

const char* to_string(SurfaceKind kind) { return kind == SurfaceKind::tube ? "tube" : "y_bifurcation"; }
const char* to_string(DeformationKind kind) { return kind == DeformationKind::bulk ? "bulk" : "pull"; }

void validate_synth_config(const SynthConfig& c) {
  if (c.primitives_per_bead < 1) throw ConfigError("synth: primitives_per_bead must be >= 1");
  if (c.point_count < 4 * static_cast<std::size_t>(c.primitives_per_bead)) {
    throw ConfigError("synth: point_count must give at least 4 beads");
  }
  if (c.frame_count < 2) throw ConfigError("synth: frame_count must be >= 2");
  if (c.color_count < 1 || c.color_count > static_cast<int>(kPalette.size())) {
    throw ConfigError("synth: color_count must be in [1, " + std::to_string(kPalette.size()) + "]");
  }
  const auto nonneg = [](double v, const char* what) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(std::string("synth: ") + what + " must be >= 0");
  };
  nonneg(c.bead_spacing_mm, "bead_spacing_mm");
  nonneg(c.bead_spread_mm, "bead_spread_mm");
  nonneg(c.pull_magnitude_mm, "pull_magnitude_mm");
  nonneg(c.noise_sigma_mm, "noise_sigma_mm");
  nonneg(c.outlier_magnitude_mm, "outlier_magnitude_mm");
  if (!(c.outlier_fraction >= 0.0 && c.outlier_fraction <= 1.0)) throw ConfigError("synth: outlier_fraction must be in [0, 1]");
  if (c.condition == DeformationKind::pull) {
    if (!(c.falloff_radius_mm > 0.0)) throw ConfigError("synth: falloff_radius_mm must be > 0 for pull");
    if (!(c.pull_direction.norm() > 0.0)) throw ConfigError("synth: pull_direction must be non-zero");
  }
  if (!c.translation_mm.allFinite()) throw ConfigError("synth: translation_mm must be finite");
  if (!(c.roi_radius_mm > 0.0)) throw ConfigError("synth: roi_radius_mm must be > 0");
  validate_material(c.material);
}

Json synth_config_to_json(const SynthConfig& c) {
  Json j;
  j["surface"] = to_string(c.surface);
  j["point_count"] = c.point_count;
  j["primitives_per_bead"] = c.primitives_per_bead;
  j["bead_spacing_mm"] = c.bead_spacing_mm;
  j["bead_spread_mm"] = c.bead_spread_mm;
  j["color_count"] = c.color_count;
  j["frame_count"] = c.frame_count;
  j["condition"] = to_string(c.condition);
  j["pull_magnitude_mm"] = c.pull_magnitude_mm;
  j["pull_center"] = vec_json(resolved_pull_center(c));
  j["pull_direction"] = vec_json(c.pull_direction);
  j["falloff_radius_mm"] = c.falloff_radius_mm;
  j["translation_mm"] = vec_json(c.translation_mm);
  j["roi_radius_mm"] = c.roi_radius_mm;
  j["gamma"] = c.gamma;
  j["material"] = {{"youngs_modulus_mpa", c.material.youngs_modulus_mpa}, {"poisson_ratio", c.material.poisson_ratio}};
  j["noise_sigma_mm"] = c.noise_sigma_mm;
  j["outlier_fraction"] = c.outlier_fraction;
  j["outlier_magnitude_mm"] = c.outlier_magnitude_mm;
  j["seed"] = c.seed;
  return j;
}

SynthConfig synth_config_from_json(const Json& j) {
  try {
    SynthConfig c;
    if (!j.is_object()) throw ConfigError("synth config: expected an object");
    if (j.contains("surface")) c.surface = parse_surface_kind(j["surface"].get<std::string>());
    if (j.contains("point_count")) c.point_count = j["point_count"].get<std::size_t>();
    if (j.contains("primitives_per_bead")) c.primitives_per_bead = j["primitives_per_bead"].get<int>();
    if (j.contains("bead_spacing_mm")) c.bead_spacing_mm = j["bead_spacing_mm"].get<double>();
    if (j.contains("bead_spread_mm")) c.bead_spread_mm = j["bead_spread_mm"].get<double>();
    if (j.contains("color_count")) c.color_count = j["color_count"].get<int>();
    if (j.contains("frame_count")) c.frame_count = j["frame_count"].get<std::size_t>();
    if (j.contains("condition")) c.condition = parse_deformation_kind(j["condition"].get<std::string>());
    if (j.contains("pull_magnitude_mm")) c.pull_magnitude_mm = j["pull_magnitude_mm"].get<double>();
    if (j.contains("pull_center") && !j["pull_center"].is_null()) c.pull_center = vec_from(j["pull_center"], "pull_center");
    if (j.contains("pull_direction")) c.pull_direction = vec_from(j["pull_direction"], "pull_direction");
    if (j.contains("falloff_radius_mm")) c.falloff_radius_mm = j["falloff_radius_mm"].get<double>();
    if (j.contains("translation_mm")) c.translation_mm = vec_from(j["translation_mm"], "translation_mm");
    if (j.contains("roi_radius_mm")) c.roi_radius_mm = j["roi_radius_mm"].get<double>();
    if (j.contains("gamma")) c.gamma = j["gamma"].get<double>();
    if (j.contains("material")) {
      const auto& m = j["material"];
      c.material.youngs_modulus_mpa = m.value("youngs_modulus_mpa", c.material.youngs_modulus_mpa);
      c.material.poisson_ratio = m.value("poisson_ratio", c.material.poisson_ratio);
    }
    if (j.contains("noise_sigma_mm")) c.noise_sigma_mm = j["noise_sigma_mm"].get<double>();
    if (j.contains("outlier_fraction")) c.outlier_fraction = j["outlier_fraction"].get<double>();
    if (j.contains("outlier_magnitude_mm")) c.outlier_magnitude_mm = j["outlier_magnitude_mm"].get<double>();
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    return c;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("synth config: ") + e.what());
  }
}

Vec3 default_pull_center(SurfaceKind surface) {
  if (surface == SurfaceKind::tube) return Vec3(kTubeLength / 2, 0, kTubeRadius);
  return Vec3(-2.0, 0, kTubeRadius);
}

Vec3 resolved_pull_center(const SynthConfig& config) {
  return config.pull_center ? *config.pull_center : default_pull_center(config.surface);
}

std::vector<RoiSpec> default_rois(const SynthConfig& config) {
  const Vec3 c = resolved_pull_center(config);
  std::vector<Vec3> centers{c};
  if (config.surface == SurfaceKind::tube) {
    const double r = kTubeRadius;
    const double a = 50.0 * std::numbers::pi / 180.0;
    centers.push_back(Vec3(c.x() - 5.0, 0, r));
    centers.push_back(Vec3(c.x() + 5.0, 0, r));
    centers.push_back(Vec3(c.x(), r * std::sin(a), r * std::cos(a)));
    centers.push_back(Vec3(c.x(), -r * std::sin(a), r * std::cos(a)));
  } else {
    centers.push_back(6.0 * branch_axis(+1) + Vec3(0, 0, kBranchRadius));
    centers.push_back(6.0 * branch_axis(-1) + Vec3(0, 0, kBranchRadius));
    centers.push_back(Vec3(-8.0, 0, kTubeRadius));
    centers.push_back(Vec3(-4.0, kTubeRadius, 0));
  }
  std::vector<RoiSpec> rois;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    RoiSpec roi;
    roi.name = "R" + std::to_string(i + 1);
    roi.kind = RoiSpec::Kind::sphere;
    roi.center = centers[i];
    roi.radius = config.roi_radius_mm;
    rois.push_back(roi);
  }
  return rois;
}

double smoothstep_falloff(double distance, double radius) {
  const double x = std::clamp(distance / radius, 0.0, 1.0);
  return 1.0 - (3.0 * x * x - 2.0 * x * x * x);
}

Vec3 synth_displacement(const SynthConfig& config, const Vec3& x0, std::size_t frame) {
  const double phase = static_cast<double>(frame) / static_cast<double>(config.frame_count - 1);
  if (config.condition == DeformationKind::bulk) return phase * config.translation_mm;
  const Vec3 c = resolved_pull_center(config);
  const double w = smoothstep_falloff(point_distance(x0, c), config.falloff_radius_mm);
  return (config.pull_magnitude_mm * phase * w) * config.pull_direction.normalized();
}

GroundTruth generate(const SynthConfig& config) {
  validate_synth_config(config);
  GroundTruth gt;
  gt.config = config;
  std::mt19937_64 rng(derive_seed(config.seed, 0, 0));

  const auto per_bead = static_cast<std::size_t>(config.primitives_per_bead);
  const std::size_t bead_count = config.point_count / per_bead;
  const std::size_t extra = config.point_count % per_bead;
  const auto beads = place_beads(config, bead_count, rng);

  double xmin = beads[0].x(), xmax = beads[0].x();
  for (const auto& b : beads) {
    xmin = std::min(xmin, b.x());
    xmax = std::max(xmax, b.x());
  }
  const double span = std::max(xmax - xmin, 1e-12);

  // Frame-0 primitives, bead by bead.
  std::vector<Primitive> base;
  base.reserve(config.point_count);
  for (std::size_t b = 0; b < bead_count; ++b) {
    const std::size_t members = per_bead + (b < extra ? 1 : 0);
    const int patch = std::min(config.color_count - 1,
                               static_cast<int>(std::floor(config.color_count * (beads[b].x() - xmin) / span)));
    std::vector<Vec3> offsets;
    while (offsets.size() < members) {
      const Vec3 o(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1));
      if (o.squaredNorm() <= 1.0) offsets.push_back(config.bead_spread_mm * o);
    }
    Vec3 mean = Vec3::Zero();
    for (const auto& o : offsets) mean += o;
    mean /= static_cast<double>(members);
    for (const auto& o : offsets) {
      Primitive p;
      p.id = static_cast<std::int64_t>(base.size());
      p.position = beads[b] + (o - mean);
      p.color = kPalette[static_cast<std::size_t>(patch)];
      p.radius = uniform(rng, 0.1, 0.3);
      p.opacity = uniform(rng, 0.3, 1.0);
      base.push_back(p);
      gt.bead_of_track.push_back(static_cast<std::uint32_t>(b));
    }
  }

  const std::size_t t_count = config.frame_count;
  std::vector<Vec3> bead_disp(bead_count * t_count);
  for (std::size_t t = 0; t < t_count; ++t) {
    for (std::size_t b = 0; b < bead_count; ++b) bead_disp[t * bead_count + b] = synth_displacement(config, beads[b], t);
  }

  gt.sequence.ids.resize(base.size());
  for (std::size_t n = 0; n < base.size(); ++n) gt.sequence.ids[n] = base[n].id;
  gt.sequence.frames.resize(t_count);
  for (std::size_t t = 0; t < t_count; ++t) {
    auto& frame = gt.sequence.frames[t];
    frame.primitives = base;
    if (t == 0) continue;
    for (std::size_t n = 0; n < base.size(); ++n) {
      frame.primitives[n].position = base[n].position + bead_disp[t * bead_count + gt.bead_of_track[n]];
    }
  }

  auto& graph = gt.graph;
  graph.frame_count = t_count;
  graph.vertex_ids.resize(bead_count);
  graph.centroids.resize(bead_count * t_count);
  graph.member_counts.resize(bead_count * t_count);
  for (std::size_t b = 0; b < bead_count; ++b) graph.vertex_ids[b] = static_cast<std::int64_t>(b);
  for (std::size_t t = 0; t < t_count; ++t) {
    for (std::size_t b = 0; b < bead_count; ++b) {
      graph.centroids[t * bead_count + b] = beads[b] + bead_disp[t * bead_count + b];
      graph.member_counts[t * bead_count + b] = static_cast<std::uint32_t>(per_bead + (b < extra ? 1 : 0));
    }
  }
  graph.edges = build_edges(beads, config.gamma);
  gt.displacement = displacement_from_graph(graph);
  gt.stress = edge_stress(graph, gt.displacement, config.material.shear_modulus_mpa());
  gt.rois = default_rois(config);
  return gt;
}

DegradeParams degrade_params(const SynthConfig& config) {
  return DegradeParams{config.noise_sigma_mm, config.outlier_fraction, config.outlier_magnitude_mm,
                       derive_seed(config.seed, 1, 0)};
}

bool degrades(const SynthConfig& config) {
  return config.noise_sigma_mm > 0.0 || (config.outlier_fraction > 0.0 && config.outlier_magnitude_mm > 0.0);
}

Degraded degrade(const PrimitiveSequence& clean, const DegradeParams& params) {
  if (!(params.noise_sigma_mm >= 0.0) || !(params.outlier_magnitude_mm >= 0.0) ||
      !(params.outlier_fraction >= 0.0 && params.outlier_fraction <= 1.0)) {
    throw ConfigError("degrade: parameters must be >= 0 and the outlier fraction <= 1");
  }
  Degraded out;
  out.sequence = clean;
  const std::size_t n = clean.track_count();

  std::mt19937_64 rng(derive_seed(params.seed, 2, 0));
  const auto spiked = static_cast<std::size_t>(std::floor(params.outlier_fraction * static_cast<double>(n)));
  std::vector<std::uint32_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = static_cast<std::uint32_t>(i);
  std::shuffle(order.begin(), order.end(), rng);
  out.spiked_tracks.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(spiked));
  std::sort(out.spiked_tracks.begin(), out.spiked_tracks.end());
  std::vector<Vec3> spikes(spiked);
  std::normal_distribution<double> unit(0.0, 1.0);
  for (auto& s : spikes) {
    Vec3 d;
    do {
      d = Vec3(unit(rng), unit(rng), unit(rng));
    } while (d.norm() < 1e-12);
    s = params.outlier_magnitude_mm * d.normalized();
  }

  const auto frames = static_cast<std::int64_t>(clean.frame_count());
#pragma omp parallel for schedule(static)
  for (std::int64_t ti = 0; ti < frames; ++ti) {
    const auto t = static_cast<std::size_t>(ti);
    auto& prims = out.sequence.frames[t].primitives;
    if (params.noise_sigma_mm > 0.0) {
      std::mt19937_64 frame_rng(derive_seed(params.seed, 3, t));
      std::normal_distribution<double> jitter(0.0, params.noise_sigma_mm);
      for (auto& p : prims) {
        const double dx = jitter(frame_rng), dy = jitter(frame_rng), dz = jitter(frame_rng);
        p.position += Vec3(dx, dy, dz);
      }
    }
    if (t > 0) {
      for (std::size_t s = 0; s < spikes.size(); ++s) prims[out.spiked_tracks[s]].position += spikes[s];
    }
  }
  return out;
}

void write_bundle(const std::filesystem::path& dir, const GroundTruth& gt, const PrimitiveSequence* observed) {
  std::filesystem::create_directories(dir);
  write_sequence(dir / "sequence.csv", gt.sequence, SequenceFormat::csv);
  if (observed) write_sequence(dir / "observed.csv", *observed, SequenceFormat::csv);
  write_json_file(dir / "gt_graph.json", graph_to_json(gt.graph));
  write_text_file(dir / "gt_displacement.csv", format_displacement_csv(gt.displacement));
  write_text_file(dir / "gt_stress.csv", format_stress_csv(gt.stress, gt.graph.edges));
  write_json_file(dir / "rois.json", rois_to_json(gt.rois));
  write_json_file(dir / "config.json", synth_config_to_json(gt.config));
}

Bundle read_bundle(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ParseError("'" + dir.string() + "' is not a GT bundle directory");
  Bundle b;
  b.config = synth_config_from_json(read_json_file(dir / "config.json"));
  b.sequence = load_sequence(dir / "sequence.csv", SequenceFormat::csv);
  if (std::filesystem::exists(dir / "observed.csv")) b.observed = load_sequence(dir / "observed.csv", SequenceFormat::csv);
  b.graph = graph_from_json(read_json_file(dir / "gt_graph.json"));
  const auto disp_path = dir / "gt_displacement.csv";
  b.displacement = parse_displacement_csv(read_text_file(disp_path), disp_path.string());
  const auto stress_path = dir / "gt_stress.csv";
  b.stress = parse_stress_csv(read_text_file(stress_path), stress_path.string());
  b.rois = rois_from_json(read_json_file(dir / "rois.json"));
  if (b.displacement.vertex_count != b.graph.vertex_count() || b.displacement.frame_count != b.graph.frame_count) {
    throw InvariantError(dir.string() + ": gt_displacement.csv does not match gt_graph.json");
  }
  if (b.stress.edge_count != b.graph.edges.size() || b.stress.frame_count != b.graph.frame_count) {
    throw InvariantError(dir.string() + ": gt_stress.csv does not match gt_graph.json");
  }
  return b;
}

}  // namespace vessel4d
