#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "vessel4d/graph.hpp"
#include "vessel4d/ingest.hpp"
#include "vessel4d/types.hpp"

namespace testgen {

using vessel4d::Vec3;

inline Vec3 uniform_point(std::mt19937_64& rng, double extent) {
  std::uniform_real_distribution<double> u(-extent, extent);
  return {u(rng), u(rng), u(rng)};
}

inline std::vector<Vec3> random_cloud(std::mt19937_64& rng, std::size_t n, double extent) {
  std::vector<Vec3> out(n);
  for (auto& p : out) p = uniform_point(rng, extent);
  return out;
}

/// Points on a coarse integer lattice, so many pairwise distances tie.
inline std::vector<Vec3> lattice_cloud(std::mt19937_64& rng, std::size_t n, int cells, double step) {
  std::uniform_int_distribution<int> c(0, cells - 1);
  std::vector<Vec3> out(n);
  for (auto& p : out) p = Vec3(c(rng) * step, c(rng) * step, c(rng) * step);
  return out;
}

inline Vec3 saturated_color(int index) {
  static const Vec3 palette[] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 0}, {1, 0, 1}, {0, 1, 1}};
  return palette[index % 6];
}

inline vessel4d::Primitive make_primitive(std::int64_t id, const Vec3& x, const Vec3& color = Vec3(1, 0, 0),
                                          double radius = 0.2, double opacity = 0.9) {
  vessel4d::Primitive p;
  p.id = id;
  p.position = x;
  p.color = color;
  p.radius = radius;
  p.opacity = opacity;
  return p;
}

/// Random sequence with varied attributes; some primitives fail the default filter.
inline vessel4d::PrimitiveSequence random_sequence(std::mt19937_64& rng, std::size_t tracks, std::size_t frames) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_real_distribution<double> step(-0.5, 0.5);
  vessel4d::PrimitiveSequence seq;
  seq.frames.resize(frames);
  std::int64_t id = 0;
  for (std::size_t n = 0; n < tracks; ++n) {
    id += 1 + static_cast<std::int64_t>(rng() % 3);
    seq.ids.push_back(id);
    Vec3 color = u01(rng) < 0.2 ? Vec3::Constant(u01(rng)) : Vec3(u01(rng), u01(rng), u01(rng));
    auto p = make_primitive(id, uniform_point(rng, 20.0), color, 0.3 * u01(rng), u01(rng));
    for (std::size_t t = 0; t < frames; ++t) {
      seq.frames[t].primitives.push_back(p);
      p.position += Vec3(step(rng), step(rng), step(rng));
    }
  }
  return seq;
}

/// Graph over given frame-0 points with a random edge subset and linear trajectories.
inline vessel4d::EdgeGraph random_graph(std::mt19937_64& rng, std::size_t vertices, std::size_t frames,
                                        double edge_probability) {
  vessel4d::EdgeGraph g;
  g.frame_count = frames;
  const auto x0 = random_cloud(rng, vertices, 10.0);
  std::vector<Vec3> vel = random_cloud(rng, vertices, 1.0);
  for (std::size_t k = 0; k < vertices; ++k) g.vertex_ids.push_back(static_cast<std::int64_t>(k));
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t k = 0; k < vertices; ++k) {
      g.centroids.push_back(x0[k] + static_cast<double>(t) * vel[k]);
      g.member_counts.push_back(1);
    }
  }
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (std::uint32_t i = 0; i < vertices; ++i) {
    for (std::uint32_t j = i + 1; j < vertices; ++j) {
      if (u01(rng) < edge_probability) g.edges.push_back({i, j});
    }
  }
  return g;
}

inline double rel_diff(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

}  // namespace testgen
