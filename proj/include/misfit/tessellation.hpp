#pragma once

// Voronoi cells, Delaunay pretriangulation with polyhedral (cospherical) cells,
// nearest and next-to-nearest neighbour graphs, the rigid refinement into tetrahedra
// and octahedra, and the three lexicographic triangulations.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "misfit/errors.hpp"
#include "misfit/geometry.hpp"

namespace misfit {

/// Uniform hash grid over a fixed point set for radius queries.
template <int D>
class SpatialGrid {
 public:
  SpatialGrid() = default;
  SpatialGrid(std::span<const Vec<D>> pts, double h) : pts_(pts.begin(), pts.end()), h_(h) {
    if (!(h > 0.0)) throw InputError("grid spacing must be positive");
    for (std::size_t i = 0; i < pts_.size(); ++i) buckets_[key(cell_of(pts_[i]))].push_back(static_cast<int>(i));
  }

  /// Indices within distance r of x, ordered by (distance, index).
  [[nodiscard]] std::vector<int> within(const Vec<D>& x, double r) const {
    std::vector<std::pair<double, int>> hits;
    const auto c = cell_of(x);
    const int span = static_cast<int>(std::ceil(r / h_));
    std::array<int, D> off{};
    off.fill(-span);
    const double r2 = r * r;
    while (true) {
      std::array<int, D> q;
      for (int i = 0; i < D; ++i) q[i] = c[i] + off[i];
      auto it = buckets_.find(key(q));
      if (it != buckets_.end())
        for (int j : it->second) {
          double d2 = (pts_[j] - x).squaredNorm();
          if (d2 <= r2) hits.emplace_back(d2, j);
        }
      int axis = D - 1;
      while (axis >= 0 && ++off[axis] > span) off[axis--] = -span;
      if (axis < 0) break;
    }
    std::sort(hits.begin(), hits.end());
    std::vector<int> out;
    out.reserve(hits.size());
    for (auto& h : hits) out.push_back(h.second);
    return out;
  }

  [[nodiscard]] const std::vector<Vec<D>>& points() const { return pts_; }

 private:
  std::array<int, D> cell_of(const Vec<D>& x) const {
    std::array<int, D> c;
    for (int i = 0; i < D; ++i) c[i] = static_cast<int>(std::floor(x[i] / h_));
    return c;
  }
  static std::uint64_t key(const std::array<int, D>& c) {
    std::uint64_t k = 0;
    for (int i = 0; i < D; ++i) k = (k << 21) | (static_cast<std::uint64_t>(c[i] + (1 << 20)) & 0x1FFFFF);
    return k;
  }

  std::vector<Vec<D>> pts_;
  double h_ = 1.0;
  std::unordered_map<std::uint64_t, std::vector<int>> buckets_;
};

template <int D>
struct VoronoiCell {
  ConvexPolytope<D> poly;
  bool boundary_truncated = false;  // some vertex lies on the bounding box
};

/// Voronoi cell of point `id`, clipped to the box x +- box_half. Bisector planes carry the
/// neighbour index as tag. Points flagged in `excluded` are ignored.
template <int D>
VoronoiCell<D> voronoi_cell(const SpatialGrid<D>& grid, int id, double box_half,
                            const std::vector<char>* excluded = nullptr) {
  const auto& pts = grid.points();
  if (id < 0 || id >= static_cast<int>(pts.size())) throw InputError("voronoi_cell: unknown atom " + std::to_string(id));
  const Vec<D> x = pts[id];
  VoronoiCell<D> out;
  out.poly = ConvexPolytope<D>::box(x - Vec<D>::Constant(box_half), x + Vec<D>::Constant(box_half));
  const double tol = kGeomTol * std::max(1.0, box_half);
  const double r_max = 2.0 * box_half * std::sqrt(static_cast<double>(D));
  // grow the query ball until no farther bisector can cut the cell
  double done = 0.0, r = std::min(r_max, 0.75 * box_half);
  while (true) {
    for (int j : grid.within(x, r)) {
      if (j == id || (excluded && (*excluded)[j])) continue;
      Vec<D> d = pts[j] - x;
      double len = d.norm();
      if (len <= done) continue;
      if (len > 2.0 * out.poly.max_distance_from(x) + tol) break;
      Vec<D> n = d / len;
      out.poly.clip({n, n.dot(x) + 0.5 * len, j}, tol);
    }
    if (r >= r_max || 2.0 * out.poly.max_distance_from(x) + tol <= r) break;
    done = r;
    r = std::min(r_max, 2.0 * r);
  }
  for (const auto& v : out.poly.vertices())
    if (out.poly.vertex_on_tag(v, kBoxTag)) out.boundary_truncated = true;
  return out;
}

struct DelaunayOptions {
  double scale = 1.0;      // typical nearest-neighbour distance
  double tau_rel = 1e-7;   // cosphericity tolerance, relative to scale
  double band_rel = 1e-5;  // near-cosphericity band that is reported as an error
  double box_rel = 4.0;    // Voronoi bounding box half-width, relative to scale
};

/// Delaunay cell as the sorted ids of all points on an empty circumsphere.
struct DelaunayCell {
  std::vector<int> ids;
  bool operator<(const DelaunayCell& o) const { return ids < o.ids; }
  bool operator==(const DelaunayCell& o) const { return ids == o.ids; }
};

/// Empty-sphere predicate for the region in which the point set is known to be complete.
template <int D>
using TrustedBall = std::function<bool(const Vec<D>& centre, double radius)>;

/// Delaunay pretriangulation: every Voronoi vertex (away from the bounding box) is the
/// centre of an empty sphere; all points on that sphere form one convex cell, so
/// cospherical groups give polyhedral cells instead of an arbitrary simplicial split.
/// Only cells whose sphere is trusted are returned; `incomplete` flags points for which
/// some incident cell was dropped or never computed.
template <int D>
std::vector<DelaunayCell> delaunay_pretriangulation(const SpatialGrid<D>& grid, const TrustedBall<D>& trusted,
                                                    const DelaunayOptions& opt,
                                                    const std::vector<char>* compute_for = nullptr,
                                                    std::vector<char>* incomplete = nullptr) {
  const auto& pts = grid.points();
  const double tau = opt.tau_rel * opt.scale, band = opt.band_rel * opt.scale;
  std::set<std::vector<int>> seen;
  if (incomplete) incomplete->assign(pts.size(), 1);
  for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
    if (compute_for && !(*compute_for)[i]) continue;
    auto cell = voronoi_cell<D>(grid, i, opt.box_rel * opt.scale);
    bool complete = true;
    for (const auto& v : cell.poly.vertices()) {
      if (cell.poly.vertex_on_tag(v, kBoxTag)) {
        complete = false;
        continue;
      }
      const double r = (v.pos - pts[i]).norm();
      if (!trusted(v.pos, r + band)) {
        complete = false;
        continue;
      }
      std::vector<int> ids;
      for (int j : grid.within(v.pos, r + band)) {
        double gap = (pts[j] - v.pos).norm() - r;
        if (std::abs(gap) <= tau) {
          ids.push_back(j);
        } else {
          std::ostringstream msg;
          msg << "near-cospherical point " << j << " (gap " << gap << ") on sphere of point " << i;
          throw GeometryError(msg.str());
        }
      }
      std::sort(ids.begin(), ids.end());
      if (static_cast<int>(ids.size()) < D + 1) throw InternalError("Delaunay cell with too few vertices");
      seen.insert(std::move(ids));
    }
    if (incomplete) (*incomplete)[i] = complete ? 0 : 1;
  }
  std::vector<DelaunayCell> out;
  out.reserve(seen.size());
  for (auto& s : seen) out.push_back({s});
  return out;
}

enum class BondClass : std::uint8_t { NN, NNN, InterfaceDiagonal };

inline std::string_view to_string(BondClass c) {
  switch (c) {
    case BondClass::NN: return "NN";
    case BondClass::NNN: return "NNN";
    case BondClass::InterfaceDiagonal: return "InterfaceDiagonal";
  }
  return "?";
}

inline BondClass parse_bond_class(std::string_view s) {
  if (s == "NN") return BondClass::NN;
  if (s == "NNN") return BondClass::NNN;
  if (s == "InterfaceDiagonal") return BondClass::InterfaceDiagonal;
  throw InputError("unknown bond class '" + std::string(s) + "'");
}

struct Bond {
  int a = 0;  // a < b
  int b = 0;
  BondClass cls = BondClass::NN;
  bool operator==(const Bond&) const = default;
};

/// Unordered unique edges. When an edge is added twice with different classes the
/// smaller enumerator wins (NN before NNN before InterfaceDiagonal).
class BondGraph {
 public:
  void add(int a, int b, BondClass cls) {
    if (a == b) throw InternalError("self bond on atom " + std::to_string(a));
    auto key = std::make_pair(std::min(a, b), std::max(a, b));
    auto [it, fresh] = index_.emplace(key, cls);
    if (!fresh && cls < it->second) it->second = cls;
  }

  [[nodiscard]] std::vector<Bond> edges() const {
    std::vector<Bond> out;
    out.reserve(index_.size());
    for (const auto& [k, c] : index_) out.push_back({k.first, k.second, c});
    return out;
  }

  [[nodiscard]] std::size_t size() const { return index_.size(); }
  [[nodiscard]] bool contains(int a, int b) const { return index_.count({std::min(a, b), std::max(a, b)}) > 0; }

  [[nodiscard]] std::vector<int> neighbours(int a, std::optional<BondClass> cls = std::nullopt) const {
    std::vector<int> out;
    for (const auto& [k, c] : index_) {
      if (cls && c != *cls) continue;
      if (k.first == a) out.push_back(k.second);
      else if (k.second == a) out.push_back(k.first);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Subgraph on kept vertices with ids remapped through `new_id` (-1 drops).
  [[nodiscard]] BondGraph remapped(const std::vector<int>& new_id) const {
    BondGraph g;
    for (const auto& [k, c] : index_) {
      int a = new_id[k.first], b = new_id[k.second];
      if (a >= 0 && b >= 0) g.add(a, b, c);
    }
    return g;
  }

 private:
  std::map<std::pair<int, int>, BondClass> index_;
};

enum class CellShape : std::uint8_t { Simplex, Octahedron, RawPolytope };

inline std::string_view to_string(CellShape s) {
  switch (s) {
    case CellShape::Simplex: return "simplex";
    case CellShape::Octahedron: return "octahedron";
    case CellShape::RawPolytope: return "raw";
  }
  return "?";
}

/// A cell of a tessellation. Simplices are stored positively oriented. Octahedra store
/// their vertices as three opposite pairs (0,1), (2,3), (4,5).
struct Cell {
  CellShape shape = CellShape::Simplex;
  std::vector<int> v;
  bool operator==(const Cell&) const = default;
};

template <int D>
using Simplex = std::array<int, D + 1>;

template <int D>
Mat<D> simplex_edges(const std::vector<Vec<D>>& pts, const int* ids) {
  Mat<D> m;
  for (int i = 0; i < D; ++i) m.col(i) = pts[ids[i + 1]] - pts[ids[0]];
  return m;
}

template <int D>
Simplex<D> oriented_simplex(const std::vector<Vec<D>>& pts, Simplex<D> s) {
  if (simplex_edges<D>(pts, s.data()).determinant() < 0) std::swap(s[0], s[1]);
  return s;
}

/// Equatorial cycle of an octahedron opposite pair p (the other four vertices in cyclic
/// order, alternating between the two remaining opposite pairs).
inline std::array<int, 4> octa_equator(const std::vector<int>& v, int pair) {
  int q = (pair + 1) % 3, r = (pair + 2) % 3;
  return {v[2 * q], v[2 * r], v[2 * q + 1], v[2 * r + 1]};
}

/// The four tetrahedra of an octahedron split along the diagonal of opposite pair p.
template <int D>
std::array<Simplex<D>, 4> octa_split(const std::vector<Vec<D>>& pts, const Cell& c, int pair) {
  static_assert(D == 3);
  auto eq = octa_equator(c.v, pair);
  std::array<Simplex<D>, 4> out;
  for (int i = 0; i < 4; ++i)
    out[i] = oriented_simplex<D>(pts, {c.v[2 * pair], c.v[2 * pair + 1], eq[i], eq[(i + 1) % 4]});
  return out;
}

/// Opposite pair whose diagonal the triangulation variant uses: the diagonal through the
/// lexicographically largest vertex under the variant's axis order.
template <int D>
int octa_variant_pair(const std::vector<Vec<D>>& pts, const Cell& c, int variant) {
  std::array<Vec<D>, 6> p;
  for (int i = 0; i < 6; ++i) p[i] = pts[c.v[i]];
  auto best = lex_max<D>(std::span<const Vec<D>>(p.data(), 6), axis_order<D>(variant));
  return static_cast<int>(best / 2);
}

template <int D>
double cell_volume(const std::vector<Vec<D>>& pts, const Cell& c) {
  if (c.shape == CellShape::Simplex)
    return std::abs(simplex_edges<D>(pts, c.v.data()).determinant()) / factorial(D);
  if constexpr (D == 3) {
    if (c.shape == CellShape::Octahedron) {
      double vol = 0.0;
      for (const auto& t : octa_split<D>(pts, c, 0)) vol += simplex_edges<D>(pts, t.data()).determinant() / 6.0;
      return vol;
    }
  }
  std::vector<Vec<D>> q;
  for (int i : c.v) q.push_back(pts[i]);
  auto facets = hull_facets<D>(q);
  auto planes = hull_planes<D>(q, facets);
  Vec<D> lo = q[0], hi = q[0];
  for (const auto& x : q) {
    lo = lo.cwiseMin(x);
    hi = hi.cwiseMax(x);
  }
  auto poly = ConvexPolytope<D>::box(lo - Vec<D>::Constant(1.0), hi + Vec<D>::Constant(1.0));
  for (const auto& h : planes) poly.clip(h);
  return poly.volume();
}

/// Unordered edges (global ids) of a cell: 1-faces of its convex hull.
template <int D>
std::vector<std::array<int, 2>> cell_edges(const std::vector<Vec<D>>& pts, const Cell& c) {
  std::vector<std::array<int, 2>> out;
  if (c.shape == CellShape::Simplex) {
    for (std::size_t i = 0; i < c.v.size(); ++i)
      for (std::size_t j = i + 1; j < c.v.size(); ++j) out.push_back({std::min(c.v[i], c.v[j]), std::max(c.v[i], c.v[j])});
  } else if (c.shape == CellShape::Octahedron) {
    for (int i = 0; i < 6; ++i)
      for (int j = i + 1; j < 6; ++j)
        if (i / 2 != j / 2) out.push_back({std::min(c.v[i], c.v[j]), std::max(c.v[i], c.v[j])});
  } else {
    std::vector<Vec<D>> q;
    for (int i : c.v) q.push_back(pts[i]);
    for (auto e : hull_edges<D>(hull_facets<D>(q)))
      out.push_back({std::min(c.v[e[0]], c.v[e[1]]), std::max(c.v[e[0]], c.v[e[1]])});
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Nearest neighbours (edges of pretriangulation cells).
template <int D>
BondGraph nearest_neighbours(const std::vector<Vec<D>>& pts, const std::vector<DelaunayCell>& pre) {
  BondGraph g;
  for (const auto& dc : pre)
    for (auto e : cell_edges<D>(pts, Cell{CellShape::RawPolytope, dc.ids})) g.add(e[0], e[1], BondClass::NN);
  return g;
}

/// Next-to-nearest neighbours: remove the nearest neighbours of `id`, recompute its
/// Voronoi cell, and return the points sharing a facet of positive measure with it.
template <int D>
std::vector<int> next_to_nearest(const SpatialGrid<D>& grid, int id, const std::vector<int>& nn, double box_half,
                                 double tau = 1e-7) {
  std::vector<char> excluded(grid.points().size(), 0);
  for (int j : nn) excluded[j] = 1;
  auto cell = voronoi_cell<D>(grid, id, box_half, &excluded);
  std::vector<int> out;
  const auto& planes = cell.poly.planes();
  for (int p = 0; p < static_cast<int>(planes.size()); ++p) {
    if (planes[p].tag < 0) continue;
    if (cell.poly.facet_measure(p) > tau) out.push_back(planes[p].tag);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// Boundary triangles (global ids) of a 3D pretriangulation cell with every polygonal
/// facet fanned from its lexicographically largest vertex; fan diagonals are appended
/// to `diagonals`.
inline std::vector<std::array<int, 3>> fanned_boundary(const std::vector<Vec<3>>& pts, const std::vector<int>& ids,
                                                       std::vector<std::array<int, 2>>& diagonals) {
  std::vector<Vec<3>> q;
  for (int i : ids) q.push_back(pts[i]);
  std::vector<std::array<int, 3>> out;
  const auto order = axis_order<3>(1);
  for (const auto& f : hull_facets<3>(q)) {
    const std::size_t m = f.size();
    std::size_t a = 0;
    for (std::size_t i = 1; i < m; ++i)
      if (lex_less<3>(q[f[a]], q[f[i]], order)) a = i;
    for (std::size_t i = 1; i + 1 < m; ++i) {
      int A = ids[f[a]], B = ids[f[(a + i) % m]], C = ids[f[(a + i + 1) % m]];
      out.push_back({A, B, C});
      if (i >= 2) diagonals.push_back({std::min(A, B), std::max(A, B)});
    }
  }
  return out;
}

namespace detail {

inline std::string dump_cell(const std::vector<int>& ids) {
  std::ostringstream s;
  s << "[";
  for (std::size_t i = 0; i < ids.size(); ++i) s << (i ? "," : "") << ids[i];
  s << "]";
  return s.str();
}

/// Combinatorial octahedron test on a triangulated sphere with six vertices; on success
/// returns the vertices ordered as opposite pairs.
inline std::optional<std::vector<int>> as_octahedron(const std::vector<int>& verts,
                                                     const std::vector<std::array<int, 3>>& tris) {
  if (verts.size() != 6 || tris.size() != 8) return std::nullopt;
  std::map<int, std::set<int>> adj;
  for (const auto& t : tris)
    for (int i = 0; i < 3; ++i) {
      adj[t[i]].insert(t[(i + 1) % 3]);
      adj[t[i]].insert(t[(i + 2) % 3]);
    }
  std::vector<int> out;
  std::set<int> used;
  for (int v : verts) {
    if (adj[v].size() != 4) return std::nullopt;
    if (used.count(v)) continue;
    int opp = -1;
    for (int w : verts)
      if (w != v && !adj[v].count(w)) opp = w;
    if (opp < 0 || used.count(opp)) return std::nullopt;
    out.push_back(v);
    out.push_back(opp);
    used.insert(v);
    used.insert(opp);
  }
  return out;
}

}  // namespace detail

/// Rigid refinement of one pretriangulation cell into simplices and octahedra. Polygonal
/// facets are fanned from their lexicographically largest vertex (the inserted diagonals
/// are reported); the resulting triangulated polyhedron is reduced by removing
/// degree-three vertices until a tetrahedron or an octahedron with three non-degenerate
/// diagonal splits remains. In 2D polygons are fanned into triangles.
template <int D>
std::vector<Cell> refine_cell(const std::vector<Vec<D>>& pts, const std::vector<int>& ids,
                              std::vector<std::array<int, 2>>& diagonals, double vol_tol = 1e-10) {
  std::vector<Cell> out;
  auto simplex_cell = [&](Simplex<D> s) {
    s = oriented_simplex<D>(pts, s);
    if (std::abs(simplex_edges<D>(pts, s.data()).determinant()) <= vol_tol * factorial(D))
      throw GeometryError("degenerate simplex in cell " + detail::dump_cell(ids));
    return Cell{CellShape::Simplex, std::vector<int>(s.begin(), s.end())};
  };
  if (static_cast<int>(ids.size()) == D + 1) {
    Simplex<D> s;
    std::copy(ids.begin(), ids.end(), s.begin());
    out.push_back(simplex_cell(s));
    return out;
  }
  if constexpr (D == 2) {
    std::vector<Vec<2>> q;
    for (int i : ids) q.push_back(pts[i]);
    Vec<2> c = Vec<2>::Zero();
    for (const auto& x : q) c += x;
    c /= static_cast<double>(q.size());
    std::vector<int> poly(q.size());
    std::iota(poly.begin(), poly.end(), 0);
    std::sort(poly.begin(), poly.end(), [&](int a, int b) {
      return std::atan2(q[a][1] - c[1], q[a][0] - c[0]) < std::atan2(q[b][1] - c[1], q[b][0] - c[0]);
    });
    const std::size_t m = poly.size();
    std::size_t a = 0;
    for (std::size_t i = 1; i < m; ++i)
      if (lex_less<2>(q[poly[a]], q[poly[i]], axis_order<2>(1))) a = i;
    for (std::size_t i = 1; i + 1 < m; ++i) {
      int A = ids[poly[a]], B = ids[poly[(a + i) % m]], C = ids[poly[(a + i + 1) % m]];
      out.push_back(simplex_cell({A, B, C}));
      if (i >= 2) diagonals.push_back({std::min(A, B), std::max(A, B)});
    }
    return out;
  } else {
    std::vector<std::array<int, 3>> tris = fanned_boundary(pts, ids, diagonals);
    std::vector<int> alive = ids;
    const auto order = axis_order<3>(1);
    while (true) {
      if (alive.size() == 4) {
        out.push_back(simplex_cell({alive[0], alive[1], alive[2], alive[3]}));
        return out;
      }
      if (auto oct = detail::as_octahedron(alive, tris)) {
        Cell c{CellShape::Octahedron, *oct};
        bool ok = true;
        for (int p = 0; p < 3 && ok; ++p)
          for (const auto& t : octa_split<3>(pts, c, p))
            if (simplex_edges<3>(pts, t.data()).determinant() <= vol_tol * 6) ok = false;
        if (ok) {
          out.push_back(c);
          return out;
        }
      }
      std::map<int, std::set<int>> adj;
      for (const auto& t : tris)
        for (int i = 0; i < 3; ++i) {
          adj[t[i]].insert(t[(i + 1) % 3]);
          adj[t[i]].insert(t[(i + 2) % 3]);
        }
      std::vector<int> cand;
      for (int v : alive)
        if (adj[v].size() == 3) cand.push_back(v);
      std::sort(cand.begin(), cand.end(), [&](int a, int b) { return lex_less<3>(pts[b], pts[a], order); });
      int chosen = -1;
      for (int v : cand) {
        std::vector<int> nb(adj[v].begin(), adj[v].end());
        Simplex<3> s{v, nb[0], nb[1], nb[2]};
        if (std::abs(simplex_edges<3>(pts, s.data()).determinant()) > vol_tol * 6) {
          out.push_back(simplex_cell(s));
          chosen = v;
          std::erase_if(tris, [&](const std::array<int, 3>& t) { return t[0] == v || t[1] == v || t[2] == v; });
          tris.push_back({nb[0], nb[1], nb[2]});
          std::erase(alive, v);
          break;
        }
      }
      if (chosen < 0) throw GeometryError("cell cannot be reduced to tetrahedra and octahedra: " + detail::dump_cell(ids));
    }
  }
}

/// Rigid tessellation: the pretriangulation refined cell by cell.
template <int D>
struct Tessellation {
  std::vector<Cell> cells;
  /// Per variant: simplices of the triangulation and, for each octahedron in cell order,
  /// the opposite pair whose diagonal was used.
  std::array<std::vector<Simplex<D>>, 3> triangulations;
  std::array<std::vector<int>, 3> octa_diagonals;

  [[nodiscard]] std::size_t count(CellShape s) const {
    return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [&](const Cell& c) { return c.shape == s; }));
  }
};

/// Simplices of one lexicographic triangulation variant (1, 2 or 3). In 2D every cell is
/// already a triangle and all variants coincide.
template <int D>
std::vector<Simplex<D>> triangulate(const std::vector<Vec<D>>& pts, const std::vector<Cell>& cells, int variant,
                                    std::vector<int>* diagonals = nullptr) {
  if (variant < 1 || variant > 3) throw InputError("triangulation variant must be 1, 2 or 3");
  std::vector<Simplex<D>> out;
  for (const auto& c : cells) {
    if (c.shape == CellShape::Simplex) {
      Simplex<D> s;
      std::copy(c.v.begin(), c.v.end(), s.begin());
      out.push_back(s);
    } else if (c.shape == CellShape::Octahedron) {
      if constexpr (D == 3) {
        int p = octa_variant_pair<3>(pts, c, variant);
        if (diagonals) diagonals->push_back(p);
        for (const auto& t : octa_split<3>(pts, c, p)) out.push_back(t);
      }
    } else {
      throw InputError("triangulate: tessellation still contains raw polytopes");
    }
  }
  return out;
}

template <int D>
void finalize_triangulations(const std::vector<Vec<D>>& pts, Tessellation<D>& t) {
  for (int v = 1; v <= 3; ++v) {
    t.octa_diagonals[v - 1].clear();
    t.triangulations[v - 1] = triangulate<D>(pts, t.cells, v, &t.octa_diagonals[v - 1]);
  }
}

/// Containment of a point in a convex hull given by outward planes: +1 strictly inside,
/// 0 within `band` of the boundary, -1 outside.
template <int D>
int classify_point(const std::vector<Halfspace<D>>& planes, const Vec<D>& x, double band) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& h : planes) worst = std::max(worst, h.normal.dot(x) - h.offset);
  if (worst < -band) return 1;
  if (worst > band) return -1;
  return 0;
}

}  // namespace misfit
