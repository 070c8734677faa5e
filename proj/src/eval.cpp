#include "vessel4d/eval.hpp"

#include <cmath>

#include "vessel4d/error.hpp"
#include "vessel4d/spatial.hpp"

namespace vessel4d {
namespace {

void require_points(std::span<const Vec3> pts, const char* what) {
  if (pts.empty()) throw EmptyResultError(std::string(what) + ": empty point set");
}

// Serial sum keeps results independent of the thread count.
double ordered_mean(const std::vector<double>& v) {
  double sum = 0.0;
  for (double d : v) sum += d;
  return sum / static_cast<double>(v.size());
}

double fraction_below(std::span<const double> d, double tau) {
  std::size_t hits = 0;
  for (double x : d) hits += x < tau ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(d.size());
}

}  // namespace

std::vector<double> nearest_distances(std::span<const Vec3> from, std::span<const Vec3> to) {
  require_points(to, "nearest_distances");
  const KdTree tree(to);
  std::vector<double> out(from.size());
  const auto n = static_cast<std::int64_t>(from.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = tree.nearest(from[static_cast<std::size_t>(i)]).distance;
  return out;
}

ChamferResult chamfer(std::span<const Vec3> pred, std::span<const Vec3> gt) {
  require_points(pred, "chamfer");
  require_points(gt, "chamfer");
  ChamferResult r;
  r.p2g = ordered_mean(nearest_distances(pred, gt));
  r.g2p = ordered_mean(nearest_distances(gt, pred));
  r.cd = r.p2g + r.g2p;
  return r;
}

double median_nn_spacing(std::span<const Vec3> gt) {
  if (gt.size() < 2) throw EmptyResultError("GT spacing needs at least two points");
  const KdTree tree(gt);
  std::vector<double> d(gt.size());
  const auto n = static_cast<std::int64_t>(gt.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    d[k] = tree.nearest_excluding(gt[k], static_cast<std::uint32_t>(k)).distance;
  }
  return median(d);
}

double cd_normalized(double cd, std::span<const Vec3> gt) {
  const double spacing = median_nn_spacing(gt);
  if (!(spacing > 0.0)) throw GeometryError("GT spacing is zero (duplicate points)");
  return cd / spacing;
}

TemporalCd temporal_delta_cd_from_steps(std::vector<double> pred_steps, std::vector<double> gt_steps) {
  if (pred_steps.size() != gt_steps.size()) throw InvariantError("temporal CD: step counts differ");
  if (pred_steps.empty()) throw EmptyResultError("temporal CD needs at least two frames");
  TemporalCd r;
  r.pred_steps = std::move(pred_steps);
  r.gt_steps = std::move(gt_steps);
  double sum = 0.0;
  for (std::size_t t = 0; t < r.gt_steps.size(); ++t) sum += std::abs(r.pred_steps[t] - r.gt_steps[t]);
  r.delta_cd = sum / static_cast<double>(r.gt_steps.size());
  const double gt_median = median(r.gt_steps);
  if (gt_median > 0.0) r.delta_cd_rel = r.delta_cd / gt_median;
  return r;
}

TemporalCd temporal_delta_cd(std::span<const PointCloud> pred, std::span<const PointCloud> gt) {
  if (pred.size() != gt.size()) throw InvariantError("temporal CD: frame counts differ");
  if (pred.size() < 2) throw EmptyResultError("temporal CD needs at least two frames");
  std::vector<double> ps(pred.size() - 1), gs(gt.size() - 1);
  for (std::size_t t = 0; t + 1 < pred.size(); ++t) {
    ps[t] = chamfer(pred[t], pred[t + 1]).cd;
    gs[t] = chamfer(gt[t], gt[t + 1]).cd;
  }
  return temporal_delta_cd_from_steps(std::move(ps), std::move(gs));
}

OverlapScore overlap_from_distances(std::span<const double> pred_to_gt, std::span<const double> gt_to_pred, double tau) {
  if (pred_to_gt.empty() || gt_to_pred.empty()) throw EmptyResultError("overlap: empty point set");
  if (!(tau > 0.0)) throw ConfigError("overlap tolerance must be > 0");
  OverlapScore s;
  s.tau = tau;
  s.precision = fraction_below(pred_to_gt, tau);
  s.recall = fraction_below(gt_to_pred, tau);
  const double denom = s.precision + s.recall;
  s.fscore = denom > 0.0 ? 2.0 * s.precision * s.recall / denom : 0.0;
  return s;
}

OverlapScore precision_recall_f(std::span<const Vec3> pred, std::span<const Vec3> gt, double tau) {
  require_points(pred, "precision_recall_f");
  require_points(gt, "precision_recall_f");
  return overlap_from_distances(nearest_distances(pred, gt), nearest_distances(gt, pred), tau);
}

RoiError roi_error(std::string name, double ours, double gt) {
  RoiError r;
  r.name = std::move(name);
  r.ours = ours;
  r.gt = gt;
  r.error = ours - gt;
  if (gt != 0.0) r.percent = 100.0 * r.error / gt;
  return r;
}

Agreement agreement(std::span<const double> gt, std::span<const double> ours) {
  if (gt.size() != ours.size()) throw InvariantError("agreement: series lengths differ");
  if (gt.size() < 3) throw EmptyResultError("agreement needs at least three pairs");
  Agreement a;
  a.pairs = gt.size();
  a.regression = ordinary_least_squares(gt, ours);
  a.bland_altman = bland_altman(gt, ours);
  return a;
}

}  // namespace vessel4d
