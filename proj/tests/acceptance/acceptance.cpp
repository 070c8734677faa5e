// One PASS/FAIL line per acceptance criterion; exit status 1 when any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "vessel4d/cluster.hpp"
#include "vessel4d/eval.hpp"
#include "vessel4d/metrics.hpp"
#include "vessel4d/parallel.hpp"
#include "vessel4d/pipeline.hpp"
#include "vessel4d/reference.hpp"
#include "vessel4d/stats.hpp"
#include "vessel4d/synth.hpp"

using namespace vessel4d;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double rel_diff(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

Bundle bundle_of(const GroundTruth& gt) {
  return Bundle{gt.config, gt.sequence, std::nullopt, gt.graph, gt.displacement, gt.stress, gt.rois};
}

Outcome rigid_rejection() {
  SynthConfig c;
  c.condition = DeformationKind::bulk;
  c.point_count = 5000;
  c.frame_count = 50;
  const auto gt = generate(c);
  const auto start = std::chrono::steady_clock::now();
  const auto a = run_analysis(gt.sequence, PipelineConfig{});
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  double worst = 0.0;
  for (double s : a.stress.sigma) worst = std::max(worst, std::abs(s));
  const bool complete = a.stress.frame_count == 50 && a.stress.edge_count > 0;
  return {complete && worst <= 1e-9 && seconds <= 60.0,
          fmt("max |sigma| %.3g MPa over %zu edges x %zu frames, pipeline %.2f s", worst, a.stress.edge_count,
              a.stress.frame_count, seconds)};
}

Outcome neo_hookean_units() {
  const double mu = MaterialParams{}.shear_modulus_mpa();
  const double at_rest = neo_hookean_stress(1.0, 0.383);
  const double ratio = neo_hookean_stress(1.1, 0.383) / 0.383;
  const bool pass = at_rest == 0.0 && std::abs(ratio - 0.3009) <= 1e-4 && std::abs(mu - 0.3833) <= 0.0005;
  return {pass, fmt("sigma(1) = %g, sigma(1.1)/0.383 = %.6f, mu = %.6f MPa", at_rest, ratio, mu)};
}

Outcome metric_oracles() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> coord(-3.0, 3.0);
  const auto cloud = [&](std::size_t n) {
    std::vector<Vec3> v(n);
    for (auto& p : v) p = Vec3(coord(rng), coord(rng), coord(rng));
    return v;
  };
  double worst = 0.0;
  int label_mismatch = 0, asymmetric = 0;
  for (int i = 0; i < 100; ++i) {
    const auto p = cloud(1 + rng() % 200), g = cloud(1 + rng() % 200);
    const double tau = 0.1 + 0.9 * static_cast<double>(rng() % 100) / 100.0;

    const auto fast = chamfer(p, g), slow = reference::chamfer(p, g);
    worst = std::max({worst, rel_diff(fast.p2g, slow.p2g), rel_diff(fast.g2p, slow.g2p), rel_diff(fast.cd, slow.cd)});
    const auto f = precision_recall_f(p, g, tau), s = reference::precision_recall_f(p, g, tau);
    worst = std::max({worst, rel_diff(f.precision, s.precision), rel_diff(f.recall, s.recall), rel_diff(f.fscore, s.fscore)});

    const auto swapped = chamfer(g, p);
    const auto fs = precision_recall_f(g, p, tau);
    if (swapped.cd != fast.cd || f.precision != fs.recall || f.recall != fs.precision || f.fscore != fs.fscore) ++asymmetric;

    const double eps = 0.3 + 0.7 * static_cast<double>(rng() % 100) / 100.0;
    const int min_pts = 2 + static_cast<int>(rng() % 5);
    if (dbscan(p, eps, min_pts).labels != reference::dbscan(p, eps, min_pts).labels) ++label_mismatch;
  }
  return {worst <= 1e-9 && label_mismatch == 0 && asymmetric == 0,
          fmt("100 instances: max rel diff %.3g, DBSCAN label mismatches %d, symmetry violations %d", worst,
              label_mismatch, asymmetric)};
}

Outcome pull_scaling() {
  std::vector<double> gt, ours;
  for (int n = 1; n <= 5; ++n) {
    SynthConfig c;
    c.pull_magnitude_mm = n;
    const auto truth = generate(c);
    const auto r = evaluate(bundle_of(truth), truth.sequence, PipelineConfig{});
    gt.push_back(r.rois.front().displacement.gt);
    ours.push_back(r.rois.front().displacement.ours);
  }
  const auto fit = ordinary_least_squares(gt, ours);
  return {std::abs(fit.slope - 1.0) <= 0.02 && fit.r2 >= 0.999,
          fmt("R1 over pulls 1..5 mm: slope %.4f, R2 %.6f", fit.slope, fit.r2)};
}

Outcome agreement_machinery() {
  double worst_ba = 0.0, worst_ols = 0.0;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t half = 2 + rng() % 20;
    const std::size_t n = 2 * half;
    const double b = u(rng), s = std::abs(u(rng)) + 0.01;
    // Differences are b +- s * sqrt((n - 1) / n): mean b, sample SD s.
    const double step = s * std::sqrt(static_cast<double>(n - 1) / static_cast<double>(n));
    std::vector<double> ref(n), test(n);
    for (std::size_t i = 0; i < n; ++i) {
      ref[i] = u(rng);
      test[i] = ref[i] + b + (i % 2 == 0 ? step : -step);
    }
    const auto ba = bland_altman(ref, test);
    worst_ba = std::max({worst_ba, std::abs(ba.bias - b), std::abs(ba.loa_upper - (b + 1.96 * s)),
                         std::abs(ba.loa_lower - (b - 1.96 * s))});

    const double slope = u(rng), intercept = u(rng);
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = u(rng);
      y[i] = slope * x[i] + intercept;
    }
    const auto fit = ordinary_least_squares(x, y);
    worst_ols = std::max({worst_ols, std::abs(fit.slope - slope), std::abs(fit.intercept - intercept)});
  }
  return {worst_ba <= 1e-9 && worst_ols <= 1e-9,
          fmt("50 trials: max BA error %.3g, max OLS error %.3g", worst_ba, worst_ols)};
}

Outcome scf_ablation() {
  std::vector<Bundle> bundles;
  for (int n = 1; n <= 5; ++n) {
    SynthConfig c;
    c.pull_magnitude_mm = n;
    c.seed = static_cast<std::uint64_t>(n);
    c.outlier_fraction = 0.05;
    c.outlier_magnitude_mm = 2.0;
    const auto gt = generate(c);
    auto b = bundle_of(gt);
    b.observed = degrade(gt.sequence, degrade_params(c)).sequence;
    bundles.push_back(std::move(b));
  }
  const auto result = ablate_scf(bundles, PipelineConfig{});
  const auto on = pooled_stress_agreement(result.with_scf);
  const auto off = pooled_stress_agreement(result.without_scf);
  if (!on || !off) return {false, "stress agreement undefined"};
  const auto& a = on->bland_altman;
  const auto& z = off->bland_altman;
  return {a.bias < z.bias && a.loa_upper < z.loa_upper,
          fmt("stress bias %.4f -> %.4f MPa, upper LoA %.4f -> %.4f MPa (without -> with SCF)", z.bias, a.bias,
              z.loa_upper, a.loa_upper)};
}

Outcome temporal_sanity() {
  SynthConfig c;
  c.frame_count = 3;
  const auto gt = generate(c);
  std::vector<PointCloud> clouds;
  for (std::size_t t = 0; t < gt.sequence.frame_count(); ++t) clouds.push_back(gt.sequence.positions(t));
  const auto same = temporal_delta_cd(clouds, clouds);
  const auto toy = temporal_delta_cd_from_steps({2.0, 2.0}, {1.0, 3.0});
  const bool pass = same.delta_cd == 0.0 && toy.delta_cd == 1.0 && toy.delta_cd_rel && *toy.delta_cd_rel == 0.5;
  return {pass, fmt("identical dCD %g; toy dCD %g, rel %g", same.delta_cd, toy.delta_cd,
                    toy.delta_cd_rel ? *toy.delta_cd_rel : -1.0)};
}

Outcome determinism() {
  const auto run = [] {
    std::vector<EvalReport> reports;
    for (int n : {2, 4}) {
      SynthConfig c;
      c.pull_magnitude_mm = n;
      c.seed = 11;
      c.noise_sigma_mm = 0.05;
      c.outlier_fraction = 0.05;
      c.outlier_magnitude_mm = 2.0;
      const auto gt = generate(c);
      auto b = bundle_of(gt);
      b.observed = degrade(gt.sequence, degrade_params(c)).sequence;
      reports.push_back(evaluate(b, *b.observed, PipelineConfig{}));
    }
    return combined_report(reports).dump(1);
  };
  const auto first = run(), second = run();
  return {first == second, fmt("%zu-byte report, runs %s", first.size(), first == second ? "identical" : "differ")};
}

}  // namespace

int main() {
  apply_thread_limit_from_env();
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"rigid-motion rejection", rigid_rejection},
      {"neo-hookean unit checks", neo_hookean_units},
      {"metric oracle equivalence", metric_oracles},
      {"linear pull scaling", pull_scaling},
      {"agreement machinery", agreement_machinery},
      {"scf ablation direction", scf_ablation},
      {"temporal metric sanity", temporal_sanity},
      {"determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s  %-28s %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
