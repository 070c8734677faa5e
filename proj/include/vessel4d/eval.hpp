#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vessel4d/stats.hpp"
#include "vessel4d/types.hpp"

namespace vessel4d {

/// Distance from each point of `from` to its nearest point in `to`.
/// Queries run in parallel against a kd-tree over `to`.
std::vector<double> nearest_distances(std::span<const Vec3> from, std::span<const Vec3> to);

struct ChamferResult {
  double p2g = 0.0;  // mean over P of NN distance to G
  double g2p = 0.0;
  double cd = 0.0;   // p2g + g2p
};

ChamferResult chamfer(std::span<const Vec3> pred, std::span<const Vec3> gt);

/// Median over G of the distance to the nearest other GT point.
double median_nn_spacing(std::span<const Vec3> gt);

/// cd / median_nn_spacing(gt). Throws GeometryError when the spacing is zero.
double cd_normalized(double cd, std::span<const Vec3> gt);

struct TemporalCd {
  std::vector<double> pred_steps;  // CD(P_t, P_t+1)
  std::vector<double> gt_steps;
  double delta_cd = 0.0;
  std::optional<double> delta_cd_rel;  // empty when the GT does not move
};

TemporalCd temporal_delta_cd(std::span<const PointCloud> pred, std::span<const PointCloud> gt);

/// Mean |pred - gt| over steps, relative to the median GT step.
TemporalCd temporal_delta_cd_from_steps(std::vector<double> pred_steps, std::vector<double> gt_steps);

struct OverlapScore {
  double tau = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double fscore = 0.0;
};

/// Fractions strictly closer than tau; F is 0 when precision + recall is 0.
OverlapScore precision_recall_f(std::span<const Vec3> pred, std::span<const Vec3> gt, double tau);

/// The same from precomputed NN distances.
OverlapScore overlap_from_distances(std::span<const double> pred_to_gt, std::span<const double> gt_to_pred, double tau);

struct RoiError {
  std::string name;
  double ours = 0.0;
  double gt = 0.0;
  double error = 0.0;             // ours - gt
  std::optional<double> percent;  // empty when gt == 0
};

RoiError roi_error(std::string name, double ours, double gt);

struct Agreement {
  std::size_t pairs = 0;
  LinearFit regression;
  BlandAltman bland_altman;
};

/// OLS of ours on gt plus Bland-Altman of ours - gt. Needs three pairs.
Agreement agreement(std::span<const double> gt, std::span<const double> ours);

}  // namespace vessel4d
