#include "vessel4d/cluster.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

#include "vessel4d/error.hpp"
#include "vessel4d/spatial.hpp"

namespace vessel4d {
namespace {

int nearest_center(const Vec3& v, std::span<const Vec3> centers) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const double d = point_distance_sq(v, centers[c]);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

double uniform01(std::mt19937_64& rng) {
  // 53 random bits; avoids implementation-defined distribution internals.
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

KMeansResult kmeans(std::span<const Vec3> values, int groups, std::uint64_t seed, int max_iterations) {
  if (groups < 1) throw ConfigError("kmeans: group count must be >= 1");
  if (values.empty()) throw EmptyResultError("kmeans: empty input");

  std::mt19937_64 rng(seed);
  const std::size_t n = values.size();
  KMeansResult result;

  // k-means++ seeding.
  result.centers.push_back(values[static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)) % n]);
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = point_distance_sq(values[i], result.centers[0]);
  while (static_cast<int>(result.centers.size()) < groups) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    std::size_t pick = 0;
    if (total <= 0.0) {
      // Fewer distinct values than groups: duplicate an existing center.
      result.centers.push_back(result.centers.front());
      continue;
    }
    const double target = uniform01(rng) * total;
    double running = 0.0;
    pick = n - 1;
    for (std::size_t i = 0; i < n; ++i) {
      running += d2[i];
      if (running > target && d2[i] > 0.0) {
        pick = i;
        break;
      }
    }
    while (d2[pick] <= 0.0) --pick;  // rounding at the tail
    result.centers.push_back(values[pick]);
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], point_distance_sq(values[i], result.centers.back()));
    }
  }

  result.labels.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) result.labels[i] = nearest_center(values[i], result.centers);
  for (int iter = 0; iter < max_iterations; ++iter) {
    result.iterations = iter + 1;
    std::vector<Vec3> sums(result.centers.size(), Vec3::Zero());
    std::vector<std::size_t> counts(result.centers.size(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      sums[result.labels[i]] += values[i];
      ++counts[result.labels[i]];
    }
    for (std::size_t c = 0; c < result.centers.size(); ++c) {
      if (counts[c] > 0) result.centers[c] = sums[c] / static_cast<double>(counts[c]);
    }
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const int label = nearest_center(values[i], result.centers);
      if (label != result.labels[i]) {
        result.labels[i] = label;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return result;
}

KMeansResult kmeans_rgb(const PrimitiveSequence& seq, int groups, std::uint64_t seed) {
  if (seq.frames.empty() || seq.ids.empty()) throw EmptyResultError("kmeans_rgb: empty sequence");
  std::vector<Vec3> colors;
  colors.reserve(seq.ids.size());
  for (const auto& p : seq.frames.front().primitives) colors.push_back(p.color);
  return kmeans(colors, groups, seed);
}

DbscanResult dbscan(std::span<const Vec3> points, double eps, int min_pts) {
  if (!(eps > 0.0)) throw ConfigError("dbscan: eps must be > 0");
  if (min_pts < 1) throw ConfigError("dbscan: min_pts must be >= 1");
  DbscanResult result;
  const std::size_t n = points.size();
  result.labels.assign(n, kNoise);
  if (n == 0) return result;

  const KdTree tree(points);
  std::vector<std::vector<std::uint32_t>> neighborhoods(n);
  for (std::size_t i = 0; i < n; ++i) tree.radius_search(points[i], eps, neighborhoods[i]);

  constexpr int kUnvisited = -2;
  std::vector<int> label(n, kUnvisited);
  int discovered = 0;
  std::vector<std::uint32_t> frontier;
  for (std::size_t i = 0; i < n; ++i) {
    if (label[i] != kUnvisited) continue;
    if (static_cast<int>(neighborhoods[i].size()) < min_pts) {
      label[i] = kNoise;  // may become a border point later
      continue;
    }
    const int cluster = discovered++;
    label[i] = cluster;
    frontier.assign(neighborhoods[i].begin(), neighborhoods[i].end());
    while (!frontier.empty()) {
      const auto j = frontier.back();
      frontier.pop_back();
      if (label[j] == kNoise) label[j] = cluster;  // border
      if (label[j] != kUnvisited) continue;
      label[j] = cluster;
      if (static_cast<int>(neighborhoods[j].size()) >= min_pts) {
        frontier.insert(frontier.end(), neighborhoods[j].begin(), neighborhoods[j].end());
      }
    }
  }

  // Renumber by lowest member index.
  std::vector<int> remap(static_cast<std::size_t>(discovered), -1);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (label[i] < 0) continue;
    auto& r = remap[static_cast<std::size_t>(label[i])];
    if (r < 0) r = next++;
    result.labels[i] = r;
  }
  result.cluster_count = next;
  return result;
}

std::vector<std::vector<std::uint32_t>> ClusterAssignment::members() const {
  std::vector<std::vector<std::uint32_t>> out(static_cast<std::size_t>(cluster_count));
  for (std::size_t n = 0; n < cluster.size(); ++n) {
    if (cluster[n] >= 0) out[static_cast<std::size_t>(cluster[n])].push_back(static_cast<std::uint32_t>(n));
  }
  return out;
}

ClusterAssignment cluster_primitives(const PrimitiveSequence& seq, const ClusterParams& params) {
  if (seq.frames.empty() || seq.ids.empty()) throw EmptyResultError("cluster_primitives: empty sequence");
  const auto colors = kmeans_rgb(seq, params.color_groups, params.seed);
  const auto& frame0 = seq.frames.front().primitives;
  const std::size_t n = seq.ids.size();

  ClusterAssignment out;
  out.track_ids = seq.ids;
  out.color_group = colors.labels;
  out.color_centers = colors.centers;
  out.cluster.assign(n, kNoise);

  // (group, local component) -> provisional global id, then renumber by lowest member.
  std::vector<int> provisional(n, kNoise);
  int provisional_count = 0;
  for (int g = 0; g < params.color_groups; ++g) {
    std::vector<std::uint32_t> idx;
    for (std::size_t i = 0; i < n; ++i) {
      if (colors.labels[i] == g) idx.push_back(static_cast<std::uint32_t>(i));
    }
    if (idx.empty()) continue;
    std::vector<Vec3> pts;
    pts.reserve(idx.size());
    for (auto i : idx) pts.push_back(frame0[i].position);
    const auto db = dbscan(pts, params.eps_mm, params.min_pts);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (db.labels[k] != kNoise) provisional[idx[k]] = provisional_count + db.labels[k];
    }
    provisional_count += db.cluster_count;
  }
  std::vector<int> remap(static_cast<std::size_t>(provisional_count), -1);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (provisional[i] < 0) continue;
    auto& r = remap[static_cast<std::size_t>(provisional[i])];
    if (r < 0) r = next++;
    out.cluster[i] = r;
  }
  out.cluster_count = next;
  return out;
}

}  // namespace vessel4d
