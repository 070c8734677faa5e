#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "vessel4d/types.hpp"

namespace vessel4d {

struct Neighbor {
  std::uint32_t index = 0;
  double distance = 0.0;
};

/// Static 3D kd-tree over a copied point set. Queries are exact and
/// thread-safe (const).
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(std::span<const Vec3> points);

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const Vec3& point(std::size_t i) const { return points_[i]; }

  /// Nearest point. Ties resolve to the smallest index.
  Neighbor nearest(const Vec3& query) const;

  /// Nearest point other than `self`, or distance +inf when size() < 2.
  Neighbor nearest_excluding(const Vec3& query, std::uint32_t self) const;

  /// All indices with distance <= radius, ascending.
  void radius_search(const Vec3& query, double radius, std::vector<std::uint32_t>& out) const;

 private:
  struct Node {
    // Leaf when axis < 0: indices [begin, end) in order_.
    std::int32_t axis = -1;
    double split = 0.0;
    std::uint32_t begin = 0, end = 0;
    std::int32_t left = -1, right = -1;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  void nearest_rec(std::int32_t node, const Vec3& q, std::uint32_t skip, Neighbor& best, double& best_sq) const;
  void radius_rec(std::int32_t node, const Vec3& q, double r, std::vector<std::uint32_t>& out) const;

  std::vector<Vec3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
  std::int32_t root_ = -1;
};

/// Euclidean distance with a fixed evaluation order, shared by every
/// nearest-neighbor path so indexed and brute-force results agree bit for bit.
inline double point_distance(const Vec3& a, const Vec3& b) {
  const double dx = a.x() - b.x(), dy = a.y() - b.y(), dz = a.z() - b.z();
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

inline double point_distance_sq(const Vec3& a, const Vec3& b) {
  const double dx = a.x() - b.x(), dy = a.y() - b.y(), dz = a.z() - b.z();
  return dx * dx + dy * dy + dz * dz;
}

}  // namespace vessel4d
