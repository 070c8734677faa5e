#include "doctest.h"
#include "helpers.hpp"
#include "vessel4d/error.hpp"
#include "vessel4d/eval.hpp"
#include "vessel4d/reference.hpp"
#include "vessel4d/stats.hpp"

using namespace vessel4d;

TEST_CASE("median, mean, sd, percentile") {
  CHECK(median(std::vector<double>{3, 1, 2}) == 2.0);
  CHECK(median(std::vector<double>{1, 3}) == 2.0);
  CHECK(median(std::vector<double>{4, 1, 3, 2}) == 2.5);
  CHECK_THROWS_AS(median(std::vector<double>{}), EmptyResultError);
  CHECK(mean(std::vector<double>{1, 2, 6}) == 3.0);
  CHECK(sample_sd(std::vector<double>{-1, 0, 1}) == 1.0);
  CHECK(percentile(std::vector<double>{0, 10}, 90.0) == doctest::Approx(9.0).epsilon(1e-15));
  CHECK(percentile(std::vector<double>{5, 1, 3}, 50.0) == 3.0);
}

TEST_CASE("chamfer examples") {
  const std::vector<Vec3> p = {{0, 0, 0}}, g = {{3, 0, 0}};
  const auto c = chamfer(p, g);
  CHECK(c.p2g == 3.0);
  CHECK(c.g2p == 3.0);
  CHECK(c.cd == 6.0);
  std::mt19937_64 rng(1);
  const auto cloud = testgen::random_cloud(rng, 50, 5.0);
  CHECK(chamfer(cloud, cloud).cd == 0.0);
  CHECK_THROWS_AS(chamfer(std::vector<Vec3>{}, g), EmptyResultError);
}

TEST_CASE("normalized chamfer") {
  std::vector<Vec3> grid;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) grid.emplace_back(i, j, 0);
  }
  CHECK(median_nn_spacing(grid) == 1.0);
  CHECK(cd_normalized(1.714, grid) == 1.714);
  for (auto& p : grid) p *= 0.5;
  CHECK(median_nn_spacing(grid) == 0.5);
  CHECK(cd_normalized(1.714, grid) == 3.428);
  CHECK(cd_normalized(0.0, grid) == 0.0);
}

TEST_CASE("temporal delta cd") {
  const auto toy = temporal_delta_cd_from_steps({2, 2}, {1, 3});
  CHECK(toy.delta_cd == 1.0);
  REQUIRE(toy.delta_cd_rel.has_value());
  CHECK(*toy.delta_cd_rel == 0.5);

  std::mt19937_64 rng(2);
  const auto base = testgen::random_cloud(rng, 30, 5.0);
  std::vector<PointCloud> still(3, base);
  const auto s = temporal_delta_cd(still, still);
  CHECK(s.delta_cd == 0.0);
  CHECK_FALSE(s.delta_cd_rel.has_value());

  std::vector<PointCloud> moving;
  for (int t = 0; t < 4; ++t) {
    PointCloud c = base;
    for (auto& p : c) p += Vec3(0.7 * t, 0, 0.1 * t * t);
    moving.push_back(c);
  }
  const auto m = temporal_delta_cd(moving, moving);
  CHECK(m.delta_cd == 0.0);
  REQUIRE(m.delta_cd_rel.has_value());
  CHECK(*m.delta_cd_rel == 0.0);
  CHECK_THROWS(temporal_delta_cd(std::vector<PointCloud>{base}, std::vector<PointCloud>{base}));
  CHECK_THROWS(temporal_delta_cd(moving, still));
}

TEST_CASE("precision, recall, F") {
  std::mt19937_64 rng(3);
  const auto cloud = testgen::random_cloud(rng, 40, 5.0);
  const auto same = precision_recall_f(cloud, cloud, 0.01);
  CHECK(same.precision == 1.0);
  CHECK(same.recall == 1.0);
  CHECK(same.fscore == 1.0);
  const auto far = precision_recall_f(std::vector<Vec3>{{0, 0, 0}}, std::vector<Vec3>{{2, 0, 0}}, 1.0);
  CHECK(far.precision == 0.0);
  CHECK(far.recall == 0.0);
  CHECK(far.fscore == 0.0);
  // Strict inequality: a distance equal to tau does not count.
  const auto edge = precision_recall_f(std::vector<Vec3>{{0, 0, 0}}, std::vector<Vec3>{{1, 0, 0}}, 1.0);
  CHECK(edge.precision == 0.0);
}

TEST_CASE("roi error") {
  const auto same = roi_error("R", 1.0, 1.0);
  CHECK(same.error == 0.0);
  CHECK(*same.percent == 0.0);
  const auto over = roi_error("R", 1.1, 1.0);
  CHECK(over.error == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(*over.percent == doctest::Approx(10.0).epsilon(1e-12));
  const auto zero = roi_error("R", 0.2, 0.0);
  CHECK(zero.error == 0.2);
  CHECK_FALSE(zero.percent.has_value());
}

TEST_CASE("agreement examples") {
  const std::vector<double> gt = {1, 2, 3, 4};
  const auto id = agreement(gt, gt);
  CHECK(id.regression.slope == 1.0);
  CHECK(id.regression.intercept == 0.0);
  CHECK(id.regression.r2 == 1.0);
  CHECK(id.bland_altman.bias == 0.0);
  CHECK(id.bland_altman.loa_lower == 0.0);
  CHECK(id.bland_altman.loa_upper == 0.0);

  const std::vector<double> g3 = {1, 2, 3}, o3 = {0, 2, 4};
  const auto ba = bland_altman(g3, o3);
  CHECK(ba.bias == 0.0);
  CHECK(ba.sd == 1.0);
  CHECK(ba.loa_lower == -1.96);
  CHECK(ba.loa_upper == 1.96);

  CHECK_THROWS_AS(agreement(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}), InvariantError);
  CHECK_THROWS(agreement(std::vector<double>{1, 2}, std::vector<double>{1, 2}));
  CHECK_THROWS(agreement(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2}));
}

TEST_CASE("agreement on 25 exact-linear pairs") {
  std::vector<double> gt, ours;
  for (int pull = 1; pull <= 5; ++pull) {
    for (int roi = 0; roi < 5; ++roi) {
      gt.push_back(pull * (1.0 - 0.15 * roi));
      ours.push_back(0.75 * gt.back() + 0.125);
    }
  }
  const auto a = agreement(gt, ours);
  CHECK(a.pairs == 25);
  CHECK(std::abs(a.regression.slope - 0.75) <= 1e-12);
  CHECK(std::abs(a.regression.intercept - 0.125) <= 1e-12);
  CHECK(std::abs(a.regression.r2 - 1.0) <= 1e-12);
}

TEST_CASE("property: kd-tree nearest distances equal brute force") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 40; ++trial) {
    const auto a = trial % 4 == 0 ? testgen::lattice_cloud(rng, 1 + rng() % 500, 5, 0.5)
                                  : testgen::random_cloud(rng, 1 + rng() % 500, 4.0);
    const auto b = testgen::random_cloud(rng, 1 + rng() % 500, 4.0);
    const auto fast = nearest_distances(a, b);
    const auto slow = reference::nearest_distances(a, b);
    for (std::size_t i = 0; i < fast.size(); ++i) REQUIRE(testgen::rel_diff(fast[i], slow[i]) <= 1e-9);
  }
}

TEST_CASE("property: chamfer symmetry, swap identity, translation invariance, monotone tau") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const auto p = testgen::random_cloud(rng, 1 + rng() % 150, 3.0);
    const auto g = testgen::random_cloud(rng, 1 + rng() % 150, 3.0);
    const auto pg = chamfer(p, g), gp = chamfer(g, p);
    REQUIRE(pg.cd == gp.cd);
    REQUIRE(pg.p2g == gp.g2p);
    const double tau = 0.2 + 0.1 * static_cast<double>(rng() % 10);
    const auto a = precision_recall_f(p, g, tau), b = precision_recall_f(g, p, tau);
    REQUIRE(a.precision == b.recall);
    REQUIRE(a.recall == b.precision);
    REQUIRE(a.fscore == b.fscore);

    // Shifted coordinates round, so distances agree to an ulp.
    const Vec3 shift(0.5 * static_cast<double>(rng() % 8), -2.0, 0.25);
    auto ps = p, gs = g;
    for (auto& x : ps) x += shift;
    for (auto& x : gs) x += shift;
    const auto shifted = chamfer(ps, gs);
    REQUIRE(testgen::rel_diff(shifted.cd, pg.cd) <= 1e-12);
    const auto sa = precision_recall_f(ps, gs, tau);
    REQUIRE(sa.precision == a.precision);
    REQUIRE(sa.recall == a.recall);

    double last_p = -1.0, last_r = -1.0;
    for (double t = 0.05; t < 3.0; t += 0.15) {
      const auto s = precision_recall_f(p, g, t);
      REQUIRE(s.precision >= last_p);
      REQUIRE(s.recall >= last_r);
      last_p = s.precision;
      last_r = s.recall;
    }
  }
}

TEST_CASE("property: bland-altman and OLS against direct formulas") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 3 + rng() % 40;
    std::vector<double> gt(n), ours(n);
    for (std::size_t i = 0; i < n; ++i) {
      gt[i] = noise(rng) * 3.0;
      ours[i] = 1.1 * gt[i] + 0.2 + noise(rng) * 0.1;
    }
    const auto a = agreement(gt, ours);
    long double sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) {
      sx += gt[i];
      sy += ours[i];
    }
    const long double mx = sx / n, my = sy / n;
    long double sxx = 0, sxy = 0, syy = 0, sd = 0, sdd = 0;
    for (std::size_t i = 0; i < n; ++i) {
      sxx += (gt[i] - mx) * (gt[i] - mx);
      sxy += (gt[i] - mx) * (ours[i] - my);
      syy += (ours[i] - my) * (ours[i] - my);
      sd += ours[i] - gt[i];
    }
    const long double bias = sd / n;
    for (std::size_t i = 0; i < n; ++i) sdd += (ours[i] - gt[i] - bias) * (ours[i] - gt[i] - bias);
    const long double slope = sxy / sxx;
    const long double r2 = sxy * sxy / (sxx * syy);
    const long double s = std::sqrt(sdd / (n - 1));
    REQUIRE(testgen::rel_diff(a.regression.slope, static_cast<double>(slope)) <= 1e-9);
    REQUIRE(std::abs(a.regression.intercept - static_cast<double>(my - slope * mx)) <= 1e-9);
    REQUIRE(testgen::rel_diff(a.regression.r2, static_cast<double>(r2)) <= 1e-9);
    REQUIRE(std::abs(a.bland_altman.bias - static_cast<double>(bias)) <= 1e-9);
    REQUIRE(std::abs(a.bland_altman.loa_upper - static_cast<double>(bias + 1.96L * s)) <= 1e-9);
    REQUIRE(std::abs(a.bland_altman.loa_lower - static_cast<double>(bias - 1.96L * s)) <= 1e-9);
  }
}
