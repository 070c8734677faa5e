#include "vessel4d/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "vessel4d/error.hpp"
#include "vessel4d/predicates.hpp"
#include "vessel4d/spatial.hpp"
#include "vessel4d/stats.hpp"

namespace vessel4d::reference {

std::vector<double> nearest_distances(std::span<const Vec3> from, std::span<const Vec3> to) {
  if (to.empty()) throw EmptyResultError("nearest_distances: empty target set");
  std::vector<double> out(from.size(), std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < from.size(); ++i) {
    for (const auto& q : to) out[i] = std::min(out[i], point_distance(from[i], q));
  }
  return out;
}

ChamferResult chamfer(std::span<const Vec3> pred, std::span<const Vec3> gt) {
  if (pred.empty() || gt.empty()) throw EmptyResultError("chamfer: empty point set");
  const auto a = nearest_distances(pred, gt);
  const auto b = nearest_distances(gt, pred);
  ChamferResult r;
  r.p2g = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(a.size());
  r.g2p = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(b.size());
  r.cd = r.p2g + r.g2p;
  return r;
}

OverlapScore precision_recall_f(std::span<const Vec3> pred, std::span<const Vec3> gt, double tau) {
  const auto a = nearest_distances(pred, gt);
  const auto b = nearest_distances(gt, pred);
  OverlapScore s;
  s.tau = tau;
  s.precision = static_cast<double>(std::count_if(a.begin(), a.end(), [&](double d) { return d < tau; })) /
                static_cast<double>(a.size());
  s.recall = static_cast<double>(std::count_if(b.begin(), b.end(), [&](double d) { return d < tau; })) /
             static_cast<double>(b.size());
  s.fscore = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

namespace {

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

}  // namespace

DbscanResult dbscan(std::span<const Vec3> points, double eps, int min_pts) {
  const std::size_t n = points.size();
  std::vector<std::vector<std::size_t>> nbr(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (point_distance(points[i], points[j]) <= eps) nbr[i].push_back(j);
    }
  }
  std::vector<bool> core(n);
  for (std::size_t i = 0; i < n; ++i) core[i] = static_cast<int>(nbr[i].size()) >= min_pts;

  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!core[i]) continue;
    for (auto j : nbr[i]) {
      if (core[j]) {
        const auto a = find_root(parent, i), b = find_root(parent, j);
        parent[std::max(a, b)] = std::min(a, b);
      }
    }
  }
  // Root of a core component is its lowest core index.
  std::vector<long> owner(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) {
      owner[i] = static_cast<long>(find_root(parent, i));
      continue;
    }
    long best = -1;
    for (auto j : nbr[i]) {
      if (!core[j]) continue;
      const auto r = static_cast<long>(find_root(parent, j));
      if (best < 0 || r < best) best = r;
    }
    owner[i] = best;
  }
  DbscanResult result;
  result.labels.assign(n, kNoise);
  std::vector<int> number(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    if (owner[i] < 0) continue;
    auto& num = number[static_cast<std::size_t>(owner[i])];
    if (num < 0) num = result.cluster_count++;
    result.labels[i] = num;
  }
  return result;
}

CentroidTracks track_centroids(const PrimitiveSequence& seq, const ClusterAssignment& assignment) {
  const auto members = assignment.members();
  CentroidTracks out;
  out.vertex_count = members.size();
  out.frame_count = seq.frame_count();
  out.centroids.assign(out.vertex_count * out.frame_count, Vec3::Zero());
  out.member_counts.assign(out.vertex_count * out.frame_count, 0);
  for (std::size_t t = 0; t < out.frame_count; ++t) {
    for (std::size_t k = 0; k < out.vertex_count; ++k) {
      Vec3 sum = Vec3::Zero();
      std::uint32_t count = 0;
      for (auto n : members[k]) {
        if (!seq.frames[t].is_observed(n)) continue;
        sum += seq.frames[t].primitives[n].position;
        ++count;
      }
      const std::size_t slot = t * out.vertex_count + k;
      out.member_counts[slot] = count;
      if (count > 0) {
        out.centroids[slot] = sum / static_cast<double>(count);
      } else if (t > 0) {
        out.centroids[slot] = out.centroids[slot - out.vertex_count];
      } else {
        throw GeometryError("cluster empty at frame 0");
      }
    }
  }
  return out;
}

DisplacementField smooth_field(const DisplacementField& field, const EdgeGraph& graph, const CoherenceParams& params) {
  const std::size_t k_count = field.vertex_count;
  DisplacementField out = field;
  out.smoothed = true;
  if (graph.edges.empty()) return out;
  std::vector<std::size_t> degree(k_count, 0);
  for (const auto& e : graph.edges) {
    ++degree[e.i];
    ++degree[e.j];
  }
  for (std::size_t t = 0; t < field.frame_count; ++t) {
    std::vector<Vec3> u(field.frame(t).begin(), field.frame(t).end());
    for (int it = 0; it < params.iterations; ++it) {
      std::vector<double> r(graph.edges.size());
      for (std::size_t e = 0; e < graph.edges.size(); ++e) r[e] = (u[graph.edges[e].i] - u[graph.edges[e].j]).norm();
      double tau = 0.0;
      if (params.robust) {
        const double m = median(r);
        std::vector<double> dev(r.size());
        for (std::size_t e = 0; e < r.size(); ++e) dev[e] = std::abs(r[e] - m);
        tau = params.kappa * (median(dev) + params.epsilon);
      }
      std::vector<Vec3> acc(k_count, Vec3::Zero());
      std::vector<double> wsum(k_count, 0.0);
      for (std::size_t e = 0; e < graph.edges.size(); ++e) {
        const auto [i, j] = std::pair{graph.edges[e].i, graph.edges[e].j};
        const double w = !params.robust ? 1.0 : (r[e] <= tau ? 1.0 : tau / (r[e] + params.epsilon));
        acc[i] += w * u[j];
        acc[j] += w * u[i];
        wsum[i] += w;
        wsum[j] += w;
      }
      std::vector<Vec3> next = u;
      for (std::size_t k = 0; k < k_count; ++k) {
        if (degree[k] == 0 || graph.members(k, t) == 0) continue;
        next[k] = (1.0 - params.alpha) * u[k] + params.alpha * (acc[k] / (wsum[k] + params.epsilon));
      }
      u = std::move(next);
    }
    for (std::size_t k = 0; k < k_count; ++k) out.at(k, t) = u[k];
  }
  return out;
}

StressField edge_stress(std::span<const Edge> edges, std::span<const Vec3> positions, std::size_t vertex_count,
                        double mu) {
  StressField out;
  out.edge_count = edges.size();
  out.frame_count = positions.size() / vertex_count;
  out.sigma.assign(out.edge_count * out.frame_count, 0.0);
  for (std::size_t t = 0; t < out.frame_count; ++t) {
    for (std::size_t e = 0; e < edges.size(); ++e) {
      const double l0 = (positions[edges[e].i] - positions[edges[e].j]).norm();
      const double lt =
          (positions[t * vertex_count + edges[e].i] - positions[t * vertex_count + edges[e].j]).norm();
      const double lambda = lt / l0;
      out.sigma[t * out.edge_count + e] = mu * (lambda * lambda - 1.0 / lambda);
    }
  }
  return out;
}

bool is_delaunay(std::span<const Vec3> points, std::span<const std::array<std::uint32_t, 4>> tetrahedra) {
  for (const auto& tet : tetrahedra) {
    const auto& a = points[tet[0]];
    const auto& b = points[tet[1]];
    const auto& c = points[tet[2]];
    const auto& d = points[tet[3]];
    const int orient = predicates::orient3d_exact(a, b, c, d);
    if (orient == 0) return false;
    for (std::size_t p = 0; p < points.size(); ++p) {
      if (p == tet[0] || p == tet[1] || p == tet[2] || p == tet[3]) continue;
      if (orient * predicates::insphere_exact(a, b, c, d, points[p]) > 0) return false;
    }
  }
  return true;
}

}  // namespace vessel4d::reference
