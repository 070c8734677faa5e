#include "vessel4d/delaunay.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <string>

#include <gmpxx.h>

#include "vessel4d/error.hpp"
#include "vessel4d/predicates.hpp"

namespace vessel4d {
namespace {

constexpr int kInfinite = -1;
constexpr int kNone = -1;

struct Tet {
  std::array<int, 4> v{};   // vertex ids, kInfinite for the point at infinity
  std::array<int, 4> nb{};  // nb[i] is across the face opposite v[i]
  bool alive = true;

  bool is_ghost() const { return v[0] == kInfinite || v[1] == kInfinite || v[2] == kInfinite || v[3] == kInfinite; }
  int index_of(int vertex) const {
    for (int i = 0; i < 4; ++i) {
      if (v[i] == vertex) return i;
    }
    return -1;
  }
};

struct Degenerate {};

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Offset in [-1,1]^3 * kDelaunayPerturbation derived from the coordinates only.
Vec3 perturb(const Vec3& p) {
  std::uint64_t h = 0x2545f4914f6cdd1dULL;
  for (int c = 0; c < 3; ++c) h = splitmix64(h ^ std::bit_cast<std::uint64_t>(p[c]));
  Vec3 out = p;
  for (int c = 0; c < 3; ++c) {
    h = splitmix64(h);
    const double unit = static_cast<double>(h >> 11) * 0x1.0p-53 * 2.0 - 1.0;
    out[c] += unit * kDelaunayPerturbation;
  }
  return out;
}

bool collinear_exact(const Vec3& a, const Vec3& b, const Vec3& c) {
  const mpq_class ux = mpq_class(b.x()) - a.x(), uy = mpq_class(b.y()) - a.y(), uz = mpq_class(b.z()) - a.z();
  const mpq_class vx = mpq_class(c.x()) - a.x(), vy = mpq_class(c.y()) - a.y(), vz = mpq_class(c.z()) - a.z();
  return uy * vz - uz * vy == 0 && uz * vx - ux * vz == 0 && ux * vy - uy * vx == 0;
}

class Triangulator {
 public:
  Triangulator(const std::vector<Vec3>& pts, bool strict) : pts_(pts), strict_(strict) {}

  /// Inserts `order` (point ids). Throws Degenerate in strict mode when a
  /// predicate evaluates to exactly zero.
  void run(const std::vector<int>& order) {
    init(order);
    for (int id : order) {
      if (inserted_[static_cast<std::size_t>(id)]) continue;
      insert(id);
    }
  }

  std::vector<std::array<std::uint32_t, 4>> finite_tets() const {
    std::vector<std::array<std::uint32_t, 4>> out;
    for (const auto& t : tets_) {
      if (!t.alive || t.is_ghost()) continue;
      out.push_back({static_cast<std::uint32_t>(t.v[0]), static_cast<std::uint32_t>(t.v[1]),
                     static_cast<std::uint32_t>(t.v[2]), static_cast<std::uint32_t>(t.v[3])});
    }
    return out;
  }

 private:
  const Vec3& P(int id) const { return pts_[static_cast<std::size_t>(id)]; }

  int checked(int s) {
    if (s == 0 && strict_) throw Degenerate{};
    return s;
  }

  int orient(int a, int b, int c, int d) { return checked(predicates::orient3d(P(a), P(b), P(c), P(d))); }

  /// Orientation of tet t with vertex slot i replaced by point p.
  int orient_replaced(const Tet& t, int i, int p) {
    std::array<int, 4> v = t.v;
    v[i] = p;
    return orient(v[0], v[1], v[2], v[3]);
  }

  bool in_conflict(int ti, int p) {
    const Tet& t = tets_[ti];
    const int inf = t.index_of(kInfinite);
    if (inf < 0) {
      return checked(predicates::insphere(P(t.v[0]), P(t.v[1]), P(t.v[2]), P(t.v[3]), P(p))) > 0;
    }
    const int o = orient_replaced(t, inf, p);
    if (o != 0) return o > 0;
    // p on the hull plane: conflict iff inside the circumcircle of the hull
    // face, i.e. inside the circumsphere of the finite tet behind it.
    const Tet& f = tets_[t.nb[inf]];
    return checked(predicates::insphere(P(f.v[0]), P(f.v[1]), P(f.v[2]), P(f.v[3]), P(p))) > 0;
  }

  int new_tet(const std::array<int, 4>& v) {
    Tet t;
    t.v = v;
    t.nb.fill(kNone);
    if (!free_.empty()) {
      const int id = free_.back();
      free_.pop_back();
      tets_[id] = t;
      return id;
    }
    tets_.push_back(t);
    return static_cast<int>(tets_.size()) - 1;
  }

  static std::array<int, 3> face_key(const std::array<int, 4>& v, int skip) {
    std::array<int, 3> key{};
    int k = 0;
    for (int i = 0; i < 4; ++i) {
      if (i != skip) key[k++] = v[i];
    }
    std::sort(key.begin(), key.end());
    return key;
  }

  void init(const std::vector<int>& order) {
    inserted_.assign(pts_.size(), false);
    const int a = order[0];
    const int b = order[1];
    std::optional<int> c, d;
    for (std::size_t k = 2; k < order.size() && !c; ++k) {
      if (!collinear_exact(P(a), P(b), P(order[k]))) c = order[k];
    }
    if (!c) throw Degenerate{};
    for (std::size_t k = 2; k < order.size() && !d; ++k) {
      if (order[k] == *c) continue;
      if (predicates::orient3d(P(a), P(b), P(*c), P(order[k])) != 0) d = order[k];
    }
    if (!d) throw Degenerate{};

    std::array<int, 4> v = {a, b, *c, *d};
    if (predicates::orient3d(P(v[0]), P(v[1]), P(v[2]), P(v[3])) < 0) std::swap(v[0], v[1]);
    const int root = new_tet(v);
    std::array<int, 4> ghosts{};
    for (int i = 0; i < 4; ++i) {
      std::array<int, 4> g = v;
      g[i] = kInfinite;
      // Flip orientation so that replacing the infinite vertex by an outside
      // point yields a positive tet.
      const int s0 = (i + 1) % 4, s1 = (i + 2) % 4;
      std::swap(g[s0], g[s1]);
      ghosts[i] = new_tet(g);
      tets_[root].nb[i] = ghosts[i];
      tets_[ghosts[i]].nb[i] = root;
    }
    // Ghost-ghost adjacency through faces that contain the infinite vertex.
    std::map<std::array<int, 3>, std::pair<int, int>> open;
    for (int gi : ghosts) link_faces(gi, open, kNone);
    for (int id : v) inserted_[static_cast<std::size_t>(id)] = true;
    last_ = root;
  }

  /// Links faces of tet `ti` (except slot `skip`) through the open-face map.
  void link_faces(int ti, std::map<std::array<int, 3>, std::pair<int, int>>& open, int skip) {
    for (int j = 0; j < 4; ++j) {
      if (j == skip || tets_[ti].nb[j] != kNone) continue;
      const auto key = face_key(tets_[ti].v, j);
      auto it = open.find(key);
      if (it == open.end()) {
        open.emplace(key, std::make_pair(ti, j));
      } else {
        const auto [other, oj] = it->second;
        tets_[ti].nb[j] = other;
        tets_[other].nb[oj] = ti;
        open.erase(it);
      }
    }
  }

  int locate(int p) {
    int current = last_;
    if (current < 0 || current >= static_cast<int>(tets_.size()) || !tets_[current].alive) {
      current = first_alive_finite();
    }
    const std::size_t limit = 4 * tets_.size() + 64;
    for (std::size_t step = 0; step < limit; ++step) {
      const Tet& t = tets_[current];
      if (t.is_ghost()) {
        if (in_conflict(current, p)) return current;
        break;
      }
      walk_rng_ = walk_rng_ * 6364136223846793005ULL + 1442695040888963407ULL;
      const int start = static_cast<int>(walk_rng_ >> 62);
      int next = kNone;
      for (int k = 0; k < 4; ++k) {
        const int i = (start + k) & 3;
        if (orient_replaced(t, i, p) < 0) {
          next = t.nb[i];
          break;
        }
      }
      if (next == kNone) {
        if (in_conflict(current, p)) return current;
        break;
      }
      current = next;
    }
    // Fallback: exhaustive search.
    for (int ti = 0; ti < static_cast<int>(tets_.size()); ++ti) {
      if (tets_[ti].alive && in_conflict(ti, p)) return ti;
    }
    throw GeometryError("delaunay: point " + std::to_string(p) + " conflicts with no tetrahedron");
  }

  int first_alive_finite() const {
    for (int ti = 0; ti < static_cast<int>(tets_.size()); ++ti) {
      if (tets_[ti].alive && !tets_[ti].is_ghost()) return ti;
    }
    return 0;
  }

  void insert(int p) {
    const int seed = locate(p);
    ++stamp_;
    if (mark_.size() < tets_.size()) mark_.resize(tets_.size(), 0);
    // mark_: stamp*2 = in cavity, stamp*2+1 = tested and outside.
    const auto in_cavity = [&](int ti) { return mark_[ti] == 2 * stamp_; };
    const auto outside = [&](int ti) { return mark_[ti] == 2 * stamp_ + 1; };

    std::vector<int> cavity{seed};
    mark_[seed] = 2 * stamp_;
    struct BoundaryFace {
      int tet;
      int slot;
    };
    std::vector<BoundaryFace> boundary;
    for (std::size_t k = 0; k < cavity.size(); ++k) {
      const int ti = cavity[k];
      for (int i = 0; i < 4; ++i) {
        const int n = tets_[ti].nb[i];
        if (in_cavity(n)) continue;
        if (!outside(n) && in_conflict(n, p)) {
          mark_[n] = 2 * stamp_;
          cavity.push_back(n);
          continue;
        }
        mark_[n] = 2 * stamp_ + 1;
        boundary.push_back({ti, i});
      }
    }

    std::vector<std::pair<int, int>> created;  // (new tet, slot holding p)
    created.reserve(boundary.size());
    for (const auto& f : boundary) {
      std::array<int, 4> v = tets_[f.tet].v;
      v[f.slot] = p;
      const int outer = tets_[f.tet].nb[f.slot];
      const int nt = new_tet(v);
      if (mark_.size() < tets_.size()) mark_.resize(tets_.size(), 0);
      mark_[nt] = 0;
      tets_[nt].nb[f.slot] = outer;
      Tet& o = tets_[outer];
      for (int j = 0; j < 4; ++j) {
        if (o.nb[j] == f.tet) o.nb[j] = nt;
      }
      created.emplace_back(nt, f.slot);
    }
    for (int ti : cavity) {
      tets_[ti].alive = false;
      free_.push_back(ti);
    }

    std::map<std::array<int, 3>, std::pair<int, int>> open;
    for (const auto& [nt, slot] : created) link_faces(nt, open, slot);
    if (!open.empty()) throw GeometryError("delaunay: cavity boundary is not closed");

    inserted_[static_cast<std::size_t>(p)] = true;
    last_ = created.front().first;
  }

  const std::vector<Vec3>& pts_;
  bool strict_;
  std::vector<Tet> tets_;
  std::vector<int> free_;
  std::vector<std::uint64_t> mark_;
  std::uint64_t stamp_ = 0;
  std::vector<bool> inserted_;
  int last_ = -1;
  std::uint64_t walk_rng_ = 0x853c49e6748fea9bULL;
};

}  // namespace

Tetrahedralization delaunay_tetrahedralize(std::span<const Vec3> points) {
  const std::size_t n = points.size();
  if (n < 4) throw GeometryError("delaunay: need at least 4 points, got " + std::to_string(n));
  for (const auto& p : points) {
    if (!p.allFinite()) throw GeometryError("delaunay: non-finite point");
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  const auto lex_less = [&](int a, int b) {
    const auto& pa = points[static_cast<std::size_t>(a)];
    const auto& pb = points[static_cast<std::size_t>(b)];
    if (pa.x() != pb.x()) return pa.x() < pb.x();
    if (pa.y() != pb.y()) return pa.y() < pb.y();
    return pa.z() < pb.z();
  };
  std::sort(order.begin(), order.end(), [&](int a, int b) { return lex_less(a, b) || (!lex_less(b, a) && a < b); });
  for (std::size_t k = 1; k < n; ++k) {
    const auto& pa = points[static_cast<std::size_t>(order[k - 1])];
    const auto& pb = points[static_cast<std::size_t>(order[k])];
    if (pa == pb) {
      if (points[static_cast<std::size_t>(order.front())] == points[static_cast<std::size_t>(order.back())]) {
        throw GeometryError("delaunay: all points coincident");
      }
      throw GeometryError("delaunay: coincident vertices " + std::to_string(order[k - 1]) + " and " +
                          std::to_string(order[k]));
    }
  }
  // Canonical insertion order: a fixed shuffle of the sorted point set.
  std::mt19937_64 rng(0x5eed);
  std::shuffle(order.begin(), order.end(), rng);
  Tetrahedralization result;
  {
    const std::vector<Vec3> exact(points.begin(), points.end());
    try {
      Triangulator tri(exact, /*strict=*/true);
      tri.run(order);
      result.tetrahedra = tri.finite_tets();
      return result;
    } catch (const Degenerate&) {
    }
  }
  std::vector<Vec3> moved;
  moved.reserve(n);
  for (const auto& p : points) moved.push_back(perturb(p));
  try {
    Triangulator tri(moved, /*strict=*/false);
    tri.run(order);
    result.tetrahedra = tri.finite_tets();
    result.perturbed = true;
  } catch (const Degenerate&) {
    throw GeometryError("delaunay: input is degenerate even after perturbation");
  }
  return result;
}

std::vector<Edge> delaunay_edges(std::span<const Vec3> points) {
  const std::size_t n = points.size();
  std::vector<Edge> edges;
  if (n < 2) throw GeometryError("delaunay: need at least 2 points");
  if (n < 4) {
    for (std::uint32_t i = 0; i < n; ++i) {
      for (std::uint32_t j = i + 1; j < n; ++j) {
        if (points[i] == points[j]) throw GeometryError("delaunay: coincident vertices");
        edges.push_back({i, j});
      }
    }
    return edges;
  }
  const auto tri = delaunay_tetrahedralize(points);
  edges.reserve(tri.tetrahedra.size() * 6);
  for (const auto& t : tri.tetrahedra) {
    for (int a = 0; a < 4; ++a) {
      for (int b = a + 1; b < 4; ++b) edges.push_back(Edge::make(t[a], t[b]));
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

}  // namespace vessel4d
