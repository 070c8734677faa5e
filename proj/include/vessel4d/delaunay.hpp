#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "vessel4d/types.hpp"

namespace vessel4d {

struct Tetrahedralization {
  /// Finite tetrahedra, positively oriented, vertex indices into the input.
  std::vector<std::array<std::uint32_t, 4>> tetrahedra;
  /// True when the input was degenerate (coplanar, cospherical, ...) and the
  /// triangulation was computed on coordinates perturbed by ~1e-9 mm.
  bool perturbed = false;
};

/// Magnitude of the deterministic perturbation applied to degenerate inputs, mm.
inline constexpr double kDelaunayPerturbation = 1e-9;

/// 3D Delaunay tetrahedralization by incremental Bowyer-Watson insertion with
/// exact predicates. Needs at least 4 points; throws GeometryError for
/// coincident points. The result depends only on the point set, not its order.
Tetrahedralization delaunay_tetrahedralize(std::span<const Vec3> points);

/// Unique edges of the tetrahedralization, sorted. For 2 or 3 points all
/// pairs are returned.
std::vector<Edge> delaunay_edges(std::span<const Vec3> points);

}  // namespace vessel4d
