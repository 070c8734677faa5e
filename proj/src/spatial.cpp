#include "vessel4d/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace vessel4d {
namespace {
constexpr std::uint32_t kLeafSize = 8;
constexpr std::uint32_t kNoSkip = std::numeric_limits<std::uint32_t>::max();
}  // namespace

KdTree::KdTree(std::span<const Vec3> points) : points_(points.begin(), points.end()) {
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  if (!points_.empty()) {
    nodes_.reserve(2 * points_.size() / kLeafSize + 2);
    root_ = build(0, static_cast<std::uint32_t>(points_.size()));
  }
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{});
  if (end - begin <= kLeafSize) {
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    return id;
  }
  // Split on the axis of largest extent.
  Vec3 lo = points_[order_[begin]], hi = lo;
  for (auto i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  if (hi[axis] - lo[axis] == 0.0) {  // all coincident
    nodes_[id].begin = begin;
    nodes_[id].end = end;
    return id;
  }
  const auto mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double pa = points_[a][axis], pb = points_[b][axis];
                     return pa < pb || (pa == pb && a < b);
                   });
  const double split = points_[order_[mid]][axis];
  const auto left = build(begin, mid);
  const auto right = build(mid, end);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].begin = begin;
  nodes_[id].end = end;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void KdTree::nearest_rec(std::int32_t node_id, const Vec3& q, std::uint32_t skip, Neighbor& best,
                         double& best_sq) const {
  const Node& node = nodes_[node_id];
  if (node.axis < 0) {
    for (auto i = node.begin; i < node.end; ++i) {
      const auto idx = order_[i];
      if (idx == skip) continue;
      const double d2 = point_distance_sq(points_[idx], q);
      if (d2 < best_sq || (d2 == best_sq && idx < best.index)) {
        best_sq = d2;
        best.index = idx;
      }
    }
    return;
  }
  // Left subtree holds coordinates <= split, right holds >= split.
  const double diff = q[node.axis] - node.split;
  const auto near = diff <= 0.0 ? node.left : node.right;
  const auto far = diff <= 0.0 ? node.right : node.left;
  nearest_rec(near, q, skip, best, best_sq);
  if (diff * diff <= best_sq) nearest_rec(far, q, skip, best, best_sq);
}

Neighbor KdTree::nearest(const Vec3& query) const { return nearest_excluding(query, kNoSkip); }

Neighbor KdTree::nearest_excluding(const Vec3& query, std::uint32_t self) const {
  Neighbor best{kNoSkip, std::numeric_limits<double>::infinity()};
  double best_sq = std::numeric_limits<double>::infinity();
  if (root_ < 0) return best;
  nearest_rec(root_, query, self, best, best_sq);
  if (best.index != kNoSkip) best.distance = point_distance(points_[best.index], query);
  return best;
}

void KdTree::radius_rec(std::int32_t node_id, const Vec3& q, double r,
                        std::vector<std::uint32_t>& out) const {
  const Node& node = nodes_[node_id];
  if (node.axis < 0) {
    for (auto i = node.begin; i < node.end; ++i) {
      const auto idx = order_[i];
      if (point_distance(points_[idx], q) <= r) out.push_back(idx);
    }
    return;
  }
  const double diff = q[node.axis] - node.split;
  if (diff <= r) radius_rec(node.left, q, r, out);
  if (diff >= -r) radius_rec(node.right, q, r, out);
}

void KdTree::radius_search(const Vec3& query, double radius, std::vector<std::uint32_t>& out) const {
  out.clear();
  if (root_ < 0 || radius < 0.0) return;
  radius_rec(root_, query, radius, out);
  std::sort(out.begin(), out.end());
}

}  // namespace vessel4d
