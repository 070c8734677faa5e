#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace vessel4d {

/// Positions and displacements are millimetres, colors are RGB in [0,1].
using Vec3 = Eigen::Vector3d;
using PointCloud = std::vector<Vec3>;

}  // namespace vessel4d

namespace vessel4d {

/// Undirected edge between vertex indices, stored with i < j.
struct Edge {
  std::uint32_t i = 0;
  std::uint32_t j = 0;

  static Edge make(std::uint32_t a, std::uint32_t b) { return a < b ? Edge{a, b} : Edge{b, a}; }
  auto operator<=>(const Edge&) const = default;
};

}  // namespace vessel4d
