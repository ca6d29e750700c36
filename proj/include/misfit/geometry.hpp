#pragma once

// Small fixed-dimension geometry kernel: vectors, simplices, convex polytopes built
// by half-space clipping, and brute-force hulls of small point sets.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "misfit/errors.hpp"

namespace misfit {

template <int D>
using Vec = Eigen::Matrix<double, D, 1>;
template <int D>
using Mat = Eigen::Matrix<double, D, D>;

inline constexpr double kGeomTol = 1e-9;

constexpr int factorial(int n) { return n <= 1 ? 1 : n * factorial(n - 1); }

/// Axis permutation used by the lexicographic vertex rules: variant v in {1,2,3}
/// compares coordinates in the order (v-1, v, v+1) mod D.
template <int D>
std::array<int, D> axis_order(int variant) {
  std::array<int, D> order{};
  for (int i = 0; i < D; ++i) order[i] = (variant - 1 + i) % D;
  return order;
}

/// Strict lexicographic comparison of two points under an axis order.
template <int D>
bool lex_less(const Vec<D>& a, const Vec<D>& b, const std::array<int, D>& order, double tol = kGeomTol) {
  for (int axis : order) {
    if (a[axis] < b[axis] - tol) return true;
    if (a[axis] > b[axis] + tol) return false;
  }
  return false;
}

/// Index of the lexicographically largest point.
template <int D>
std::size_t lex_max(std::span<const Vec<D>> pts, const std::array<int, D>& order) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (lex_less<D>(pts[best], pts[i], order)) best = i;
  return best;
}

/// Matrix whose columns are p_i - p_0.
template <int D>
Mat<D> edge_matrix(std::span<const Vec<D>> pts) {
  Mat<D> m;
  for (int i = 0; i < D; ++i) m.col(i) = pts[i + 1] - pts[0];
  return m;
}

template <int D>
double signed_simplex_volume(std::span<const Vec<D>> pts) {
  return edge_matrix<D>(pts).determinant() / factorial(D);
}

/// Circumcentre of a nondegenerate simplex.
template <int D>
Vec<D> circumcenter(std::span<const Vec<D>> pts) {
  Mat<D> a;
  Vec<D> b;
  for (int i = 0; i < D; ++i) {
    Vec<D> e = pts[i + 1] - pts[0];
    a.row(i) = e.transpose();
    b[i] = 0.5 * e.squaredNorm();
  }
  return pts[0] + a.fullPivLu().solve(b);
}

template <int D>
struct Halfspace {
  Vec<D> normal;  // unit length
  double offset;  // region is normal . z <= offset
  int tag = -1;   // caller-defined; bisectors carry the neighbour id
};

inline constexpr int kBoxTag = -1;

/// Convex polytope maintained as a vertex list where each vertex records the
/// indices of the planes tight at it. Two vertices span an edge iff they share at
/// least D-1 tight planes, which lets clipping work without an explicit face graph
/// and tolerates several planes meeting at one vertex.
template <int D>
class ConvexPolytope {
 public:
  struct Vertex {
    Vec<D> pos;
    std::vector<int> planes;  // sorted
  };

  static ConvexPolytope box(const Vec<D>& lo, const Vec<D>& hi) {
    ConvexPolytope p;
    for (int axis = 0; axis < D; ++axis) {
      Vec<D> n = Vec<D>::Zero();
      n[axis] = -1.0;
      p.planes_.push_back({n, -lo[axis], kBoxTag});
      n[axis] = 1.0;
      p.planes_.push_back({n, hi[axis], kBoxTag});
    }
    for (int mask = 0; mask < (1 << D); ++mask) {
      Vertex v;
      for (int axis = 0; axis < D; ++axis) {
        bool upper = (mask >> axis) & 1;
        v.pos[axis] = upper ? hi[axis] : lo[axis];
        v.planes.push_back(2 * axis + (upper ? 1 : 0));
      }
      std::sort(v.planes.begin(), v.planes.end());
      p.verts_.push_back(std::move(v));
    }
    return p;
  }

  /// Simplex with outward facet planes; facet i is opposite vertex i and carries tag
  /// kBoxTag so that clipping against it is distinguishable from bisectors.
  static ConvexPolytope simplex(std::span<const Vec<D>> pts) {
    ConvexPolytope p;
    for (int i = 0; i <= D; ++i) {
      std::array<Vec<D>, D> face;
      int f = 0;
      for (int j = 0; j <= D; ++j)
        if (j != i) face[f++] = pts[j];
      Vec<D> n = facet_normal(face);
      double len = n.norm();
      if (len < 1e-300) throw GeometryError("degenerate simplex");
      n /= len;
      double off = n.dot(face[0]);
      if (n.dot(pts[i]) > off) {
        n = -n;
        off = -off;
      }
      p.planes_.push_back({n, off, kBoxTag});
    }
    for (int j = 0; j <= D; ++j) {
      Vertex v{pts[j], {}};
      for (int i = 0; i <= D; ++i)
        if (i != j) v.planes.push_back(i);
      p.verts_.push_back(std::move(v));
    }
    return p;
  }

  /// Intersect with a half-space. Vertices within tol of the plane become tight on it.
  void clip(const Halfspace<D>& h, double tol = kGeomTol) {
    const int idx = static_cast<int>(planes_.size());
    planes_.push_back(h);
    const std::size_t n = verts_.size();
    std::vector<double> s(n);
    bool any_out = false;
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = h.normal.dot(verts_[i].pos) - h.offset;
      any_out |= s[i] > tol;
    }
    if (!any_out) {
      for (std::size_t i = 0; i < n; ++i)
        if (s[i] >= -tol) insert_sorted(verts_[i].planes, idx);
      return;
    }
    std::vector<Vertex> out;
    out.reserve(n + 8);
    for (std::size_t i = 0; i < n; ++i) {
      if (s[i] > tol) continue;
      Vertex v = verts_[i];
      if (s[i] >= -tol) insert_sorted(v.planes, idx);
      out.push_back(std::move(v));
    }
    std::vector<int> common;
    for (std::size_t i = 0; i < n; ++i) {
      if (s[i] >= -tol) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (s[j] <= tol) continue;
        common.clear();
        std::set_intersection(verts_[i].planes.begin(), verts_[i].planes.end(), verts_[j].planes.begin(),
                              verts_[j].planes.end(), std::back_inserter(common));
        if (static_cast<int>(common.size()) < D - 1) continue;
        double t = s[i] / (s[i] - s[j]);
        Vertex v{verts_[i].pos + t * (verts_[j].pos - verts_[i].pos), common};
        insert_sorted(v.planes, idx);
        out.push_back(std::move(v));
      }
    }
    verts_ = merge_duplicates(std::move(out), tol);
  }

  [[nodiscard]] bool empty() const { return verts_.size() < static_cast<std::size_t>(D + 1); }
  [[nodiscard]] const std::vector<Vertex>& vertices() const { return verts_; }
  [[nodiscard]] const std::vector<Halfspace<D>>& planes() const { return planes_; }

  [[nodiscard]] bool vertex_on_tag(const Vertex& v, int tag) const {
    return std::any_of(v.planes.begin(), v.planes.end(), [&](int p) { return planes_[p].tag == tag; });
  }

  [[nodiscard]] double max_distance_from(const Vec<D>& x) const {
    double r = 0.0;
    for (const auto& v : verts_) r = std::max(r, (v.pos - x).norm());
    return r;
  }

  [[nodiscard]] Vec<D> centroid() const {
    Vec<D> c = Vec<D>::Zero();
    for (const auto& v : verts_) c += v.pos;
    return verts_.empty() ? c : Vec<D>(c / static_cast<double>(verts_.size()));
  }

  /// Vertices tight on a plane, ordered cyclically (3D) or along the line (2D).
  [[nodiscard]] std::vector<Vec<D>> facet(int plane) const {
    std::vector<Vec<D>> pts;
    for (const auto& v : verts_)
      if (std::binary_search(v.planes.begin(), v.planes.end(), plane)) pts.push_back(v.pos);
    order_in_plane(pts, planes_[plane].normal);
    return pts;
  }

  /// (D-1)-dimensional measure of the facet on a plane: area in 3D, length in 2D.
  [[nodiscard]] double facet_measure(int plane) const {
    auto pts = facet(plane);
    if (pts.size() < static_cast<std::size_t>(D)) return 0.0;
    if constexpr (D == 2) {
      return (pts.back() - pts.front()).norm();
    } else {
      Vec<D> c = Vec<D>::Zero();
      for (const auto& p : pts) c += p;
      c /= static_cast<double>(pts.size());
      double area = 0.0;
      for (std::size_t i = 0; i < pts.size(); ++i)
        area += 0.5 * (pts[i] - c).cross(pts[(i + 1) % pts.size()] - c).norm();
      return area;
    }
  }

  /// Total facet measure per tag, over planes carrying that tag.
  [[nodiscard]] double tag_measure(int tag) const {
    double m = 0.0;
    for (std::size_t p = 0; p < planes_.size(); ++p)
      if (planes_[p].tag == tag) m += facet_measure(static_cast<int>(p));
    return m;
  }

  [[nodiscard]] double volume() const {
    if (empty()) return 0.0;
    const Vec<D> c0 = centroid();
    if constexpr (D == 2) {
      std::vector<Vec<D>> pts;
      for (const auto& v : verts_) pts.push_back(v.pos);
      std::sort(pts.begin(), pts.end(), [&](const Vec<D>& a, const Vec<D>& b) {
        return std::atan2(a[1] - c0[1], a[0] - c0[0]) < std::atan2(b[1] - c0[1], b[0] - c0[0]);
      });
      double area = 0.0;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto& a = pts[i];
        const auto& b = pts[(i + 1) % pts.size()];
        area += (a[0] - c0[0]) * (b[1] - c0[1]) - (a[1] - c0[1]) * (b[0] - c0[0]);
      }
      return std::abs(area) / 2.0;
    } else {
      double vol = 0.0;
      std::vector<std::vector<std::size_t>> seen;  // coincident planes share one facet
      for (std::size_t p = 0; p < planes_.size(); ++p) {
        std::vector<std::size_t> on;
        for (std::size_t i = 0; i < verts_.size(); ++i)
          if (std::binary_search(verts_[i].planes.begin(), verts_[i].planes.end(), static_cast<int>(p))) on.push_back(i);
        if (on.size() < 3 || std::find(seen.begin(), seen.end(), on) != seen.end()) continue;
        seen.push_back(on);
        auto pts = facet(static_cast<int>(p));
        Vec<D> cf = Vec<D>::Zero();
        for (const auto& q : pts) cf += q;
        cf /= static_cast<double>(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) {
          Mat<D> m;
          m.col(0) = pts[i] - c0;
          m.col(1) = pts[(i + 1) % pts.size()] - c0;
          m.col(2) = cf - c0;
          vol += std::abs(m.determinant()) / 6.0;
        }
      }
      return vol;
    }
  }

 private:
  static Vec<D> facet_normal(const std::array<Vec<D>, D>& face) {
    if constexpr (D == 2) {
      Vec<D> e = face[1] - face[0];
      return Vec<D>(-e[1], e[0]);
    } else {
      return (face[1] - face[0]).cross(face[2] - face[0]);
    }
  }

  static void insert_sorted(std::vector<int>& v, int x) {
    auto it = std::lower_bound(v.begin(), v.end(), x);
    if (it == v.end() || *it != x) v.insert(it, x);
  }

  static std::vector<Vertex> merge_duplicates(std::vector<Vertex> in, double tol) {
    std::vector<Vertex> out;
    out.reserve(in.size());
    for (auto& v : in) {
      auto it = std::find_if(out.begin(), out.end(), [&](const Vertex& w) { return (w.pos - v.pos).norm() <= tol; });
      if (it == out.end()) {
        out.push_back(std::move(v));
      } else {
        std::vector<int> merged;
        std::set_union(it->planes.begin(), it->planes.end(), v.planes.begin(), v.planes.end(),
                       std::back_inserter(merged));
        it->planes = std::move(merged);
      }
    }
    return out;
  }

  static void order_in_plane(std::vector<Vec<D>>& pts, const Vec<D>& normal) {
    if (pts.size() < 2) return;
    Vec<D> c = Vec<D>::Zero();
    for (const auto& p : pts) c += p;
    c /= static_cast<double>(pts.size());
    if constexpr (D == 2) {
      Vec<D> dir(-normal[1], normal[0]);
      std::sort(pts.begin(), pts.end(), [&](const Vec<D>& a, const Vec<D>& b) { return dir.dot(a) < dir.dot(b); });
    } else {
      Vec<D> e1 = (pts[0] - c);
      if (e1.norm() < 1e-300) e1 = normal.unitOrthogonal();
      e1 = (e1 - normal * normal.dot(e1)).normalized();
      Vec<D> e2 = normal.cross(e1);
      std::sort(pts.begin(), pts.end(), [&](const Vec<D>& a, const Vec<D>& b) {
        return std::atan2(e2.dot(a - c), e1.dot(a - c)) < std::atan2(e2.dot(b - c), e1.dot(b - c));
      });
    }
  }

  std::vector<Halfspace<D>> planes_;
  std::vector<Vertex> verts_;
};

/// Facets of the convex hull of a small point set whose points are all extreme
/// (cospherical groups). Each facet lists point indices, cyclically ordered and
/// counter-clockwise seen from outside in 3D, ordered along the edge in 2D.
/// Brute force over all (D)-tuples; intended for cells with at most a few dozen points.
template <int D>
std::vector<std::vector<int>> hull_facets(std::span<const Vec<D>> pts, double tol = kGeomTol) {
  const int n = static_cast<int>(pts.size());
  std::vector<std::vector<int>> facets;
  std::vector<std::vector<int>> keys;  // sorted index sets, for deduplication
  auto consider = [&](const Vec<D>& normal_in, const Vec<D>& anchor) {
    double len = normal_in.norm();
    if (len < 1e-12) return;
    Vec<D> nrm = normal_in / len;
    bool any_pos = false, any_neg = false;
    std::vector<int> on;
    for (int m = 0; m < n; ++m) {
      double s = nrm.dot(pts[m] - anchor);
      if (s > tol) any_pos = true;
      else if (s < -tol) any_neg = true;
      else on.push_back(m);
    }
    if (any_pos && any_neg) return;
    if (std::find(keys.begin(), keys.end(), on) != keys.end()) return;
    keys.push_back(on);
    if (any_pos) nrm = -nrm;
    Vec<D> c = Vec<D>::Zero();
    for (int m : on) c += pts[m];
    c /= static_cast<double>(on.size());
    if constexpr (D == 2) {
      Vec<D> dir(-nrm[1], nrm[0]);
      std::sort(on.begin(), on.end(), [&](int a, int b) { return dir.dot(pts[a]) < dir.dot(pts[b]); });
    } else {
      Vec<D> e1 = pts[on[0]] - c;
      e1 = (e1 - nrm * nrm.dot(e1)).normalized();
      Vec<D> e2 = nrm.cross(e1);
      auto angle = [&](int a) { return std::atan2(e2.dot(pts[a] - c), e1.dot(pts[a] - c)); };
      std::sort(on.begin(), on.end(), [&](int a, int b) { return angle(a) < angle(b); });
    }
    facets.push_back(std::move(on));
  };
  if constexpr (D == 2) {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        Vec<D> e = pts[j] - pts[i];
        consider(Vec<D>(-e[1], e[0]), pts[i]);
      }
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        for (int k = j + 1; k < n; ++k) consider((pts[j] - pts[i]).cross(pts[k] - pts[i]), pts[i]);
  }
  return facets;
}

/// Unordered edges (i<j) of the hull given its facets.
template <int D>
std::vector<std::array<int, 2>> hull_edges(const std::vector<std::vector<int>>& facets) {
  std::vector<std::array<int, 2>> edges;
  for (const auto& f : facets) {
    const std::size_t m = f.size();
    const std::size_t count = (D == 2) ? m - 1 : m;
    for (std::size_t i = 0; i < count; ++i) {
      int a = f[i], b = f[(i + 1) % m];
      edges.push_back({std::min(a, b), std::max(a, b)});
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

/// Outward facet planes of a convex hull (normal, offset) for containment tests.
template <int D>
std::vector<Halfspace<D>> hull_planes(std::span<const Vec<D>> pts, const std::vector<std::vector<int>>& facets) {
  Vec<D> c = Vec<D>::Zero();
  for (const auto& p : pts) c += p;
  c /= static_cast<double>(pts.size());
  std::vector<Halfspace<D>> planes;
  for (const auto& f : facets) {
    Vec<D> nrm;
    if constexpr (D == 2) {
      Vec<D> e = pts[f.back()] - pts[f.front()];
      nrm = Vec<D>(-e[1], e[0]);
    } else {
      nrm = (pts[f[1]] - pts[f[0]]).cross(pts[f[2]] - pts[f[0]]);
    }
    nrm.normalize();
    double off = nrm.dot(pts[f[0]]);
    if (nrm.dot(c) > off) {
      nrm = -nrm;
      off = -off;
    }
    planes.push_back({nrm, off, kBoxTag});
  }
  return planes;
}

}  // namespace misfit
