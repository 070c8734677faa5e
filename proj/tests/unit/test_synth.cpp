#include <filesystem>

#include "doctest.h"
#include "helpers.hpp"
#include "vessel4d/error.hpp"
#include "vessel4d/metrics.hpp"
#include "vessel4d/stats.hpp"
#include "vessel4d/synth.hpp"

using namespace vessel4d;
namespace fs = std::filesystem;

namespace {

SynthConfig small_config(DeformationKind kind, double magnitude = 5.0) {
  SynthConfig c;
  c.point_count = 2000;
  c.frame_count = 4;
  c.condition = kind;
  c.pull_magnitude_mm = magnitude;
  return c;
}

double roi_max_median(const GroundTruth& gt, const RoiSpec& spec) {
  const auto roi = resolve_roi(spec, gt.graph);
  return series_max(roi_displacement_series(gt.displacement, roi));
}

fs::path scratch_dir(const char* name) {
  const auto dir = fs::temp_directory_path() / ("vessel4d_test_" + std::string(name));
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("smoothstep falloff") {
  CHECK(smoothstep_falloff(0.0, 10.0) == 1.0);
  CHECK(smoothstep_falloff(10.0, 10.0) == 0.0);
  CHECK(smoothstep_falloff(12.0, 10.0) == 0.0);
  CHECK(smoothstep_falloff(5.0, 10.0) == 0.5);
  double last = 1.0;
  for (double d = 0.0; d <= 10.0; d += 0.25) {
    const double w = smoothstep_falloff(d, 10.0);
    CHECK(w <= last);
    last = w;
  }
  // C1: vanishing slope at both ends.
  CHECK((1.0 - smoothstep_falloff(1e-4, 10.0)) < 1e-6);
  CHECK(smoothstep_falloff(10.0 - 1e-4, 10.0) < 1e-6);
}

TEST_CASE("bulk translation: every GT displacement is the translation, every GT stress is zero") {
  const auto gt = generate(small_config(DeformationKind::bulk));
  const std::size_t last = gt.config.frame_count - 1;
  for (std::size_t k = 0; k < gt.graph.vertex_count(); ++k) {
    CHECK(std::abs(gt.displacement.at(k, last).norm() - 5.0) <= 1e-12);
  }
  for (double s : gt.stress.sigma) CHECK(std::abs(s) <= 1e-12);
}

TEST_CASE("pull: the pull center moves by the full magnitude at the last frame") {
  for (auto surface : {SurfaceKind::tube, SurfaceKind::y_bifurcation}) {
    auto c = small_config(DeformationKind::pull, 3.0);
    c.surface = surface;
    const Vec3 center = resolved_pull_center(c);
    CHECK(synth_displacement(c, center, c.frame_count - 1) == Vec3(0, 0, 3.0));
    CHECK(synth_displacement(c, center, 0) == Vec3::Zero());
    CHECK(synth_displacement(c, center + Vec3(c.falloff_radius_mm, 0, 0), c.frame_count - 1) == Vec3::Zero());
  }
}

TEST_CASE("pull magnitudes 1..5 give GT ROI maxima in ratio 1:2:3:4:5") {
  std::vector<double> maxima;
  for (int n = 1; n <= 5; ++n) {
    const auto gt = generate(small_config(DeformationKind::pull, n));
    maxima.push_back(roi_max_median(gt, gt.rois.front()));
  }
  for (int n = 2; n <= 5; ++n) CHECK(testgen::rel_diff(maxima[n - 1], n * maxima[0]) <= 1e-12);
  CHECK(maxima[0] > 0.5);
}

TEST_CASE("property: default ROIs are non-empty with interior edges") {
  for (auto surface : {SurfaceKind::tube, SurfaceKind::y_bifurcation}) {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
      SynthConfig c;
      c.surface = surface;
      c.seed = seed;
      c.frame_count = 2;
      const auto gt = generate(c);
      REQUIRE(gt.rois.size() == 5);
      for (const auto& spec : gt.rois) {
        const auto roi = resolve_roi(spec, gt.graph);
        REQUIRE(roi.vertices.size() >= 2);
        REQUIRE_FALSE(roi.edges.empty());
      }
      CHECK(gt.rois[0].name == "R1");
      CHECK(gt.rois[0].center == resolved_pull_center(c));
    }
  }
}

TEST_CASE("generator structure") {
  const auto gt = generate(small_config(DeformationKind::pull));
  CHECK(gt.sequence.track_count() == 2000);
  CHECK(gt.sequence.frame_count() == 4);
  CHECK(gt.graph.vertex_count() == 100);
  CHECK_NOTHROW(validate_sequence(gt.sequence));
  CHECK_NOTHROW(validate_graph(gt.graph));
  // Bead centers are the centroids of their primitives.
  std::vector<Vec3> sum(gt.graph.vertex_count(), Vec3::Zero());
  std::vector<int> count(gt.graph.vertex_count(), 0);
  for (std::size_t n = 0; n < gt.sequence.track_count(); ++n) {
    sum[gt.bead_of_track[n]] += gt.sequence.frames[2].primitives[n].position;
    ++count[gt.bead_of_track[n]];
  }
  for (std::size_t b = 0; b < sum.size(); ++b) {
    CHECK(((sum[b] / count[b]) - gt.graph.position(b, 2)).norm() <= 1e-12);
  }
  // Every primitive passes the default filter.
  for (const auto& p : gt.sequence.frames[0].primitives) {
    CHECK(p.radius >= 0.1);
    CHECK(p.opacity >= 0.3);
    CHECK(rgb_std(p.color) > 0.05);
  }
}

TEST_CASE("config validation") {
  SynthConfig c;
  c.frame_count = 1;
  CHECK_THROWS_AS(validate_synth_config(c), ConfigError);
  c = {};
  c.falloff_radius_mm = 0.0;
  CHECK_THROWS_AS(validate_synth_config(c), ConfigError);
  c = {};
  c.pull_magnitude_mm = -1.0;
  CHECK_THROWS_AS(validate_synth_config(c), ConfigError);
  c = {};
  c.outlier_fraction = 1.5;
  CHECK_THROWS_AS(validate_synth_config(c), ConfigError);
  CHECK_THROWS_AS(parse_surface_kind("torus"), ConfigError);
  CHECK_THROWS_AS(parse_deformation_kind("twist"), ConfigError);
  c = {};
  c.pull_center = Vec3(1, 2, 3);
  c.seed = 99;
  const auto back = synth_config_from_json(synth_config_to_json(c));
  CHECK(synth_config_to_json(back) == synth_config_to_json(c));
  CHECK(*back.pull_center == Vec3(1, 2, 3));
}

TEST_CASE("determinism: identical seeds give identical ground truth") {
  const auto a = generate(small_config(DeformationKind::pull));
  const auto b = generate(small_config(DeformationKind::pull));
  CHECK(a.sequence.frames == b.sequence.frames);
  CHECK(a.graph == b.graph);
  CHECK(a.displacement == b.displacement);
  CHECK(a.stress == b.stress);
  auto other = small_config(DeformationKind::pull);
  other.seed = 2;
  CHECK_FALSE(generate(other).graph == a.graph);
}

TEST_CASE("degrade: zero parameters are the identity") {
  const auto gt = generate(small_config(DeformationKind::pull));
  const auto d = degrade(gt.sequence, DegradeParams{});
  CHECK(d.sequence.frames == gt.sequence.frames);
  CHECK(d.spiked_tracks.empty());
}

TEST_CASE("degrade: spike count and magnitude") {
  const auto gt = generate(small_config(DeformationKind::pull));
  DegradeParams p;
  p.outlier_fraction = 0.05;
  p.outlier_magnitude_mm = 2.0;
  const auto d = degrade(gt.sequence, p);
  CHECK(d.spiked_tracks.size() == 100);  // floor(0.05 * 2000)
  std::vector<bool> spiked(gt.sequence.track_count(), false);
  for (auto n : d.spiked_tracks) spiked[n] = true;
  for (std::size_t t = 0; t < gt.sequence.frame_count(); ++t) {
    for (std::size_t n = 0; n < gt.sequence.track_count(); ++n) {
      const double off = (d.sequence.frames[t].primitives[n].position - gt.sequence.frames[t].primitives[n].position).norm();
      if (t > 0 && spiked[n]) {
        REQUIRE(std::abs(off - 2.0) <= 1e-12);
      } else {
        REQUIRE(off == 0.0);
      }
    }
  }
  CHECK(d.sequence.ids == gt.sequence.ids);
  p.outlier_fraction = 0.0333;
  CHECK(degrade(gt.sequence, p).spiked_tracks.size() == 66);
}

TEST_CASE("degrade: jitter sample SD per axis is within 10% of sigma") {
  std::mt19937_64 rng(9);
  PrimitiveSequence clean;
  clean.frames.resize(2);
  for (std::int64_t id = 0; id < 12000; ++id) {
    clean.ids.push_back(id);
    const auto p = testgen::make_primitive(id, testgen::uniform_point(rng, 30.0));
    clean.frames[0].primitives.push_back(p);
    clean.frames[1].primitives.push_back(p);
  }
  DegradeParams p;
  p.noise_sigma_mm = 0.1;
  p.seed = 4;
  const auto d = degrade(clean, p);
  for (std::size_t t = 0; t < 2; ++t) {
    for (int axis = 0; axis < 3; ++axis) {
      std::vector<double> diffs;
      for (std::size_t n = 0; n < clean.track_count(); ++n) {
        diffs.push_back(d.sequence.frames[t].primitives[n].position[axis] - clean.frames[t].primitives[n].position[axis]);
      }
      CHECK(std::abs(sample_sd(diffs) - 0.1) <= 0.01);
    }
  }
  const auto again = degrade(clean, p);
  CHECK(again.sequence.frames == d.sequence.frames);
}

TEST_CASE("bundle round trip") {
  auto c = small_config(DeformationKind::pull);
  c.outlier_fraction = 0.05;
  c.outlier_magnitude_mm = 2.0;
  const auto gt = generate(c);
  const auto obs = degrade(gt.sequence, degrade_params(c));
  const auto dir = scratch_dir("bundle");
  write_bundle(dir, gt, &obs.sequence);
  for (const char* f : {"sequence.csv", "observed.csv", "gt_graph.json", "gt_displacement.csv", "gt_stress.csv",
                        "rois.json", "config.json"}) {
    CHECK(fs::exists(dir / f));
  }
  const auto b = read_bundle(dir);
  CHECK(b.sequence.frames == gt.sequence.frames);
  REQUIRE(b.observed.has_value());
  CHECK(b.observed->frames == obs.sequence.frames);
  CHECK(b.graph == gt.graph);
  CHECK(b.displacement.u == gt.displacement.u);
  CHECK(b.stress.sigma == gt.stress.sigma);
  CHECK(b.rois.size() == gt.rois.size());
  CHECK(synth_config_to_json(b.config) == synth_config_to_json(c));
  fs::remove_all(dir);
  CHECK_THROWS(read_bundle(dir));
}
