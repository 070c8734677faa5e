#include <Eigen/Geometry>

#include "doctest.h"
#include "helpers.hpp"
#include "vessel4d/error.hpp"
#include "vessel4d/graph_io.hpp"
#include "vessel4d/metrics.hpp"
#include "vessel4d/reference.hpp"
#include "vessel4d/stats.hpp"

using namespace vessel4d;

namespace {

EdgeGraph line_graph(std::size_t k, std::size_t frames) {
  EdgeGraph g;
  g.frame_count = frames;
  for (std::size_t v = 0; v < k; ++v) g.vertex_ids.push_back(static_cast<std::int64_t>(10 + v));
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t v = 0; v < k; ++v) {
      g.centroids.emplace_back(static_cast<double>(v), 0, 0);
      g.member_counts.push_back(1);
    }
  }
  for (std::uint32_t v = 0; v + 1 < k; ++v) g.edges.push_back({v, v + 1});
  return g;
}

DisplacementField zero_field(std::size_t k, std::size_t frames) {
  DisplacementField f;
  f.vertex_count = k;
  f.frame_count = frames;
  f.u.assign(k * frames, Vec3::Zero());
  return f;
}

RoiSpec index_roi(std::string name, std::vector<std::int64_t> ids) {
  RoiSpec r;
  r.name = std::move(name);
  r.kind = RoiSpec::Kind::index_list;
  r.vertex_ids = std::move(ids);
  return r;
}

}  // namespace

TEST_CASE("neo-hookean stress examples") {
  const MaterialParams m;
  CHECK(m.shear_modulus_mpa() == doctest::Approx(1.15 / 3.0).epsilon(1e-15));
  CHECK(std::abs(m.shear_modulus_mpa() - 0.383) < 0.0005);
  CHECK(neo_hookean_stress(1.0, 0.383) == 0.0);
  CHECK(neo_hookean_stress(1.1, 0.383) == doctest::Approx(0.383 * (1.21 - 1.0 / 1.1)).epsilon(1e-15));
  CHECK(neo_hookean_stress(1.1, 0.383) == doctest::Approx(0.1153).epsilon(1e-3));
  MaterialParams bad;
  bad.poisson_ratio = 0.6;
  CHECK_THROWS_AS(validate_material(bad), ConfigError);
  bad = {};
  bad.youngs_modulus_mpa = 0.0;
  CHECK_THROWS_AS(validate_material(bad), ConfigError);
}

TEST_CASE("property: stress is strictly increasing, signed by stretch and linear in mu") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.05, 5.0);
  for (int i = 0; i < 2000; ++i) {
    double a = u(rng), b = u(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    const double mu = u(rng);
    REQUIRE(neo_hookean_stress(a, mu) < neo_hookean_stress(b, mu));
    REQUIRE((neo_hookean_stress(a, mu) > 0) == (a > 1.0));
    if (a < 1.0) REQUIRE(neo_hookean_stress(a, mu) < 0.0);
    REQUIRE(neo_hookean_stress(a, 2.0 * mu) == 2.0 * neo_hookean_stress(a, mu));
  }
}

TEST_CASE("property: rigid motions give unit stretch and zero stress") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    const auto g0 = testgen::random_graph(rng, 20, 1, 0.3);
    if (g0.edges.empty()) continue;
    const Eigen::Quaterniond q = Eigen::Quaterniond::UnitRandom();
    const Vec3 shift = testgen::uniform_point(rng, 50.0);
    std::vector<Vec3> pos(g0.centroids.begin(), g0.centroids.end());
    for (std::size_t k = 0; k < 20; ++k) pos.push_back(q * g0.centroids[k] + shift);
    const auto s = edge_stress(g0.edges, pos, 20, 0.3833);
    for (std::size_t e = 0; e < g0.edges.size(); ++e) {
      REQUIRE(s.at(e, 0) == 0.0);
      REQUIRE(std::abs(s.at(e, 1)) <= 1e-9 * 0.3833);
    }
  }
}

TEST_CASE("property: parallel edge stress equals the serial reference") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const auto g = testgen::random_graph(rng, 30, 4, 0.2);
    const auto fast = edge_stress(g.edges, g.centroids, 30, 0.4);
    const auto slow = reference::edge_stress(g.edges, g.centroids, 30, 0.4);
    REQUIRE(fast.sigma.size() == slow.sigma.size());
    for (std::size_t i = 0; i < fast.sigma.size(); ++i) REQUIRE(testgen::rel_diff(fast.sigma[i], slow.sigma[i]) <= 1e-12);
  }
}

TEST_CASE("edge_stress: zero rest length is rejected") {
  const std::vector<Vec3> pos = {{0, 0, 0}, {0, 0, 0}};
  CHECK_THROWS_AS(edge_stress(std::vector<Edge>{{0, 1}}, pos, 2, 0.38), GeometryError);
}

TEST_CASE("roi displacement series examples") {
  auto g = line_graph(3, 2);
  auto f = zero_field(3, 2);
  const auto roi = resolve_roi(index_roi("all", {10, 11, 12}), g);
  for (std::size_t k = 0; k < 3; ++k) f.at(k, 1) = Vec3(1, 0, 0);
  CHECK(roi_displacement_series(f, roi) == std::vector<double>{0.0, 1.0});
  f.at(0, 1) = Vec3(0, 0, 0);
  f.at(1, 1) = Vec3(0, 1, 0);
  f.at(2, 1) = Vec3(0, 0, 2);
  CHECK(roi_displacement_series(f, roi)[1] == 1.0);
  const auto pair = resolve_roi(index_roi("pair", {10, 12}), g);
  f.at(0, 1) = Vec3(1, 0, 0);
  f.at(2, 1) = Vec3(0, 3, 0);
  CHECK(roi_displacement_series(f, pair)[1] == 2.0);
}

TEST_CASE("series max") {
  CHECK(series_max(std::vector<double>{0, 0.5, 0.3}) == 0.5);
  CHECK(series_max(std::vector<double>{2.5, 2.5}) == 2.5);
  CHECK_THROWS_AS(series_max(std::vector<double>{}), EmptyResultError);
}

TEST_CASE("roi stress series examples") {
  auto g = line_graph(4, 2);
  StressField s;
  s.edge_count = 3;
  s.frame_count = 2;
  s.sigma = {0, 0, 0, 0.01, -0.03, 0.05};
  const auto all = resolve_roi(index_roi("all", {10, 11, 12, 13}), g);
  CHECK(roi_stress_series(s, all) == std::vector<double>{0.0, 0.03});
  const auto one = resolve_roi(index_roi("one", {11, 12}), g);
  REQUIRE(one.edges == std::vector<std::uint32_t>{1});
  CHECK(roi_stress_series(s, one) == std::vector<double>{0.0, 0.03});
  const auto none = resolve_roi(index_roi("none", {10, 12}), g);
  CHECK_THROWS_AS(roi_stress_series(s, none), EmptyResultError);
}

TEST_CASE("rigid motion gives zero ROI stress at every frame") {
  auto g = line_graph(5, 3);
  for (std::size_t t = 1; t < 3; ++t) {
    for (std::size_t k = 0; k < 5; ++k) g.centroids[t * 5 + k] += Vec3(2.0 * t, -1, 0.5);
  }
  const auto field = displacement_from_graph(g);
  const auto stress = edge_stress(g, field, MaterialParams{}.shear_modulus_mpa());
  const auto roi = resolve_roi(index_roi("all", {10, 11, 12, 13, 14}), g);
  for (double v : roi_stress_series(stress, roi)) CHECK(v <= 1e-12);
}

TEST_CASE("roi resolution") {
  auto g = line_graph(5, 1);
  RoiSpec sphere;
  sphere.name = "s";
  sphere.kind = RoiSpec::Kind::sphere;
  sphere.center = Vec3(2, 0, 0);
  sphere.radius = 1.0;  // inclusive: vertices 1, 2, 3
  const auto r = resolve_roi(sphere, g);
  CHECK(r.vertices == std::vector<std::uint32_t>{1, 2, 3});
  CHECK(r.edges == std::vector<std::uint32_t>{1, 2});
  sphere.center = Vec3(100, 0, 0);
  CHECK_THROWS_AS(resolve_roi(sphere, g), EmptyResultError);
  CHECK_THROWS_AS(resolve_roi(index_roi("x", {99}), g), ConfigError);
  // Ids are resolved through vertex_ids, not positions in the array.
  CHECK(resolve_roi(index_roi("y", {13, 11}), g).vertices == std::vector<std::uint32_t>{1, 3});
}

TEST_CASE("roi json") {
  const auto rois = rois_from_json(Json::parse(R"([
    {"name":"a","kind":"index_list","indices":[1,2,3]},
    {"name":"b","kind":"sphere","center":[1,2,3],"radius":2.5}])"));
  REQUIRE(rois.size() == 2);
  CHECK(rois[0].vertex_ids == std::vector<std::int64_t>{1, 2, 3});
  CHECK(rois[1].center == Vec3(1, 2, 3));
  CHECK(rois[1].radius == 2.5);
  const auto back = rois_from_json(rois_to_json(rois));
  CHECK(back[1].center == rois[1].center);
  CHECK(back[0].vertex_ids == rois[0].vertex_ids);
  CHECK_THROWS_AS(rois_from_json(Json::parse(R"([{"name":"c","kind":"cube"}])")), ParseError);
  CHECK_THROWS_AS(rois_from_json(Json::parse(R"([{"name":"c","kind":"sphere","center":[1,2],"radius":1}])")),
                  ParseError);
  CHECK_THROWS_AS(rois_from_json(Json::parse(R"({"x":1})")), ParseError);
}

TEST_CASE("metric csv layout") {
  auto g = line_graph(3, 2);
  auto f = zero_field(3, 2);
  for (std::size_t k = 0; k < 3; ++k) f.at(k, 1) = Vec3(0, 0, 0.5 * static_cast<double>(k));
  const auto stress = edge_stress(g, f, 0.4);
  const std::vector<RoiSpec> rois = {index_roi("R1", {10, 11, 12})};
  const auto m = compute_roi_metrics(g, f, stress, rois);
  REQUIRE(m.size() == 1);
  CHECK(m[0].displacement_max_mm == 0.5);
  const auto csv = format_metrics_csv(m);
  CHECK(csv.rfind("roi,frame,d_med_mm,stress_med_mpa\nR1,0,0,0\nR1,1,0.5,", 0) == 0);
  CHECK(csv.find("\n\nroi,d_max_mm,stress_max_mpa\nR1,0.5,") != std::string::npos);
}
