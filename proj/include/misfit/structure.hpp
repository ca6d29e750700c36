#pragma once

// Biphase nanowire structure: closed domain, rigid tessellation and bond graph.

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <vector>

#include "misfit/errors.hpp"
#include "misfit/geometry.hpp"
#include "misfit/lattice.hpp"
#include "misfit/tessellation.hpp"

namespace misfit {

struct StructureOptions {
  double pad = 5.0;          // Euclidean window padding around the slab, in bond lengths
  double tau_rel = 1e-7;     // cosphericity tolerance
  double band_rel = 1e-5;    // near-cosphericity error band
  bool check_coverage = true;
};

template <int D>
struct Structure {
  LatticeSpec spec;
  WireDomain<D> domain;
  AtomSet<D> atoms;          // closed domain, ids 0..n-1 in generation order
  std::vector<Vec<D>> xi;    // lattice coordinates V^{-1} x of the reference positions
  Tessellation<D> tess;      // cells meeting the open slab
  BondGraph graph;           // bonds with both endpoints in the closed domain
  std::size_t pretriangulation_cells = 0;  // pretriangulation cells meeting the slab
  std::size_t raw_cells = 0;               // of which non-simplicial and non-octahedral
  double covered_volume = 0.0;             // sum of |cell ∩ slab|, Cartesian

  [[nodiscard]] std::vector<Vec<D>> positions() const { return atoms.positions(); }
};

namespace detail {

/// Volume (in lattice coordinates) of the intersection of conv(q) with the slab box.
template <int D>
double clipped_lattice_volume(const std::vector<Vec<D>>& q, const Vec<D>& lo, const Vec<D>& hi) {
  Vec<D> qlo = q[0], qhi = q[0];
  for (const auto& x : q) {
    qlo = qlo.cwiseMin(x);
    qhi = qhi.cwiseMax(x);
  }
  for (int i = 0; i < D; ++i)
    if (qhi[i] <= lo[i] || qlo[i] >= hi[i]) return 0.0;
  auto facets = hull_facets<D>(q);
  Vec<D> blo = lo.cwiseMax(qlo), bhi = hi.cwiseMin(qhi);
  auto poly = ConvexPolytope<D>::box(blo, bhi);
  for (const auto& h : hull_planes<D>(q, facets)) {
    poly.clip(h, 1e-12);
    if (poly.empty()) return 0.0;
  }
  return poly.volume();
}

template <int D>
double hull_lattice_volume(const std::vector<Vec<D>>& q) {
  Vec<D> lo = q[0], hi = q[0];
  for (const auto& x : q) {
    lo = lo.cwiseMin(x);
    hi = hi.cwiseMax(x);
  }
  return clipped_lattice_volume<D>(q, lo - Vec<D>::Constant(1.0), hi + Vec<D>::Constant(1.0));
}

}  // namespace detail

/// Builds the biphase structure for a spec. The window of the biphase lattice around the
/// slab is tessellated; pretriangulation cells whose intersection with the open slab has
/// positive volume form the tessellation, their vertices the closed domain. Bonds are
/// all edges of the (infinite-lattice) bond structure between closed-domain atoms.
template <int D>
Structure<D> build_structure(const LatticeSpec& spec, const StructureOptions& opt = {}) {
  spec.validate();
  const auto lb = lattice_basis<D>(spec.kind);
  const double scale = lb.sublattice_spacing;
  const Mat<D> Vinv = lb.generators.inverse();
  double margin = 0.0;
  for (int i = 0; i < D; ++i) margin = std::max(margin, opt.pad * scale * Vinv.row(i).norm());
  Parallelepiped<D> region;
  const AtomSet<D> window = generate_window<D>(spec, std::ceil(margin), &region);
  const std::vector<Vec<D>> pts = window.positions();
  const std::size_t n = pts.size();
  const WireDomain<D> dom = wire_domain<D>(spec);
  const Vec<D> slo = dom.slab.lo, shi = dom.slab.hi;

  std::vector<Vec<D>> xi(n);
  for (std::size_t i = 0; i < n; ++i) xi[i] = region.coords(pts[i]);

  // atoms whose Voronoi cells are computed: a lower bound of the Euclidean distance to
  // the slab is below the reach of cells touching it
  const double reach = (opt.pad - 2.5) * scale;
  std::vector<char> near(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    double gap = 0.0;
    for (int a = 0; a < D; ++a) {
      double row = Vinv.row(a).norm();
      gap = std::max({gap, (xi[i][a] - shi[a]) / row, (slo[a] - xi[i][a]) / row});
    }
    near[i] = gap < reach;
  }
  auto trusted = [&](const Vec<D>& c, double r) { return region.distance_to_boundary(c) > r; };

  struct RawPiece {
    std::vector<int> ids;            // window ids, sorted
    std::vector<Cell> cells;         // refinement (window ids)
    int contained = -1;              // sublattice kinds: atom inside the cell
  };

  BondGraph graph;   // window ids
  std::vector<char> incomplete(n, 1);
  std::vector<RawPiece> pieces;  // cells carrying the tessellation

  auto pretriangulate = [&](const std::vector<int>& members, double scale) {
    std::vector<Vec<D>> sp;
    std::vector<char> cf;
    for (int id : members) {
      sp.push_back(pts[id]);
      cf.push_back(near[id]);
    }
    SpatialGrid<D> grid(sp, scale);
    DelaunayOptions dopt{scale, opt.tau_rel, opt.band_rel, 4.0};
    std::vector<char> inc;
    auto cells = delaunay_pretriangulation<D>(grid, trusted, dopt, &cf, &inc);
    for (std::size_t i = 0; i < members.size(); ++i) incomplete[members[i]] = inc[i];
    for (auto& c : cells)
      for (int& id : c.ids) id = members[id];
    return cells;
  };

  const bool sub = uses_sublattice_bonds(spec.kind);
  if (!sub) {
    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);
    for (auto& dc : pretriangulate(all, lb.nn_distance)) {
      RawPiece p{dc.ids, {}, -1};
      for (auto e : cell_edges<D>(pts, Cell{CellShape::RawPolytope, dc.ids})) graph.add(e[0], e[1], BondClass::NN);
      std::vector<std::array<int, 2>> diag;
      p.cells = refine_cell<D>(pts, dc.ids, diag);
      for (auto e : diag) graph.add(e[0], e[1], BondClass::InterfaceDiagonal);
      pieces.push_back(std::move(p));
    }
  } else {
    std::vector<int> s1, s2;
    for (std::size_t i = 0; i < n; ++i) (window.atoms[i].sublattice == 1 ? s1 : s2).push_back(static_cast<int>(i));
    const double band = opt.band_rel * lb.sublattice_spacing;
    std::vector<Vec<D>> p2, p1;
    for (int id : s2) p2.push_back(pts[id]);
    for (int id : s1) p1.push_back(pts[id]);
    SpatialGrid<D> g2(p2, lb.sublattice_spacing), g1(p1, lb.sublattice_spacing);

    // atoms of the other sublattice strictly inside a cell; errors on ambiguity
    auto contained_in = [&](const std::vector<int>& ids, const SpatialGrid<D>& og, const std::vector<int>& omembers) {
      std::vector<Vec<D>> q;
      for (int id : ids) q.push_back(pts[id]);
      auto planes = hull_planes<D>(q, hull_facets<D>(q));
      Vec<D> c = Vec<D>::Zero();
      for (const auto& x : q) c += x;
      c /= static_cast<double>(q.size());
      double rad = 0.0;
      for (const auto& x : q) rad = std::max(rad, (x - c).norm());
      std::vector<int> inside;
      for (int j : og.within(c, rad + band)) {
        int cls = classify_point<D>(planes, og.points()[j], band);
        if (cls == 0) throw GeometryError("sublattice atom " + std::to_string(omembers[j]) + " on the boundary of cell " +
                                          detail::dump_cell(ids));
        if (cls > 0) inside.push_back(omembers[j]);
      }
      if (inside.size() > 1) throw GeometryError("cell " + detail::dump_cell(ids) + " contains several sublattice atoms");
      return inside.empty() ? -1 : inside[0];
    };

    for (auto& dc : pretriangulate(s1, lb.sublattice_spacing)) {
      RawPiece p{dc.ids, {}, -1};
      for (auto e : cell_edges<D>(pts, Cell{CellShape::RawPolytope, dc.ids})) graph.add(e[0], e[1], BondClass::NNN);
      bool relevant = std::any_of(dc.ids.begin(), dc.ids.end(), [&](int id) { return near[id] != 0; });
      p.contained = relevant ? contained_in(dc.ids, g2, s2) : -1;
      std::vector<std::array<int, 2>> diag;
      if (p.contained >= 0) {
        const int y = p.contained;
        for (int v : dc.ids) graph.add(y, v, BondClass::NN);
        if constexpr (D == 3) {
          for (const auto& t : fanned_boundary(pts, dc.ids, diag)) {
            auto s = oriented_simplex<3>(pts, {y, t[0], t[1], t[2]});
            p.cells.push_back(Cell{CellShape::Simplex, std::vector<int>(s.begin(), s.end())});
          }
        } else {
          std::vector<Vec<2>> q;
          for (int id : dc.ids) q.push_back(pts[id]);
          for (auto e : hull_edges<2>(hull_facets<2>(q))) {
            auto s = oriented_simplex<2>(pts, {y, dc.ids[e[0]], dc.ids[e[1]]});
            p.cells.push_back(Cell{CellShape::Simplex, std::vector<int>(s.begin(), s.end())});
          }
        }
      } else {
        p.cells = refine_cell<D>(pts, dc.ids, diag);
      }
      for (auto e : diag) graph.add(e[0], e[1], BondClass::NNN);
      pieces.push_back(std::move(p));
    }
    for (auto& dc : pretriangulate(s2, lb.sublattice_spacing)) {
      for (auto e : cell_edges<D>(pts, Cell{CellShape::RawPolytope, dc.ids})) graph.add(e[0], e[1], BondClass::NNN);
      std::vector<std::array<int, 2>> diag;
      if constexpr (D == 3) fanned_boundary(pts, dc.ids, diag);
      else refine_cell<D>(pts, dc.ids, diag);
      for (auto e : diag) graph.add(e[0], e[1], BondClass::NNN);
      bool relevant = std::any_of(dc.ids.begin(), dc.ids.end(), [&](int id) { return near[id] != 0; });
      if (!relevant) continue;
      int x = contained_in(dc.ids, g1, s1);
      if (x >= 0)
        for (int v : dc.ids) graph.add(x, v, BondClass::NN);
    }
  }

  // cells meeting the open slab and the closed domain
  Structure<D> out;
  out.spec = spec;
  out.domain = dom;
  std::vector<char> in_domain(n, 0);
  std::vector<const RawPiece*> meeting;
  double covered = 0.0, slab_lattice_volume = (shi - slo).prod();
  for (const auto& p : pieces) {
    std::vector<Vec<D>> q;
    for (int id : p.ids) q.push_back(xi[id]);
    double v = detail::clipped_lattice_volume<D>(q, slo, shi);
    if (v <= 1e-12 * detail::hull_lattice_volume<D>(q)) continue;
    covered += v;
    meeting.push_back(&p);
    for (int id : p.ids) in_domain[id] = 1;
    if (p.contained >= 0) in_domain[p.contained] = 1;
  }
  const double det = std::abs(region.V.determinant());
  out.covered_volume = covered * det;
  if (opt.check_coverage && std::abs(covered - slab_lattice_volume) > 1e-8 * slab_lattice_volume) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "tessellation does not cover the slab: " << covered << " vs " << slab_lattice_volume;
    throw InternalError(msg.str());
  }
  for (std::size_t i = 0; i < n; ++i)
    if (in_domain[i] && incomplete[i])
      throw InternalError("closed-domain atom " + std::to_string(i) + " has cells outside the trusted window");

  std::vector<int> new_id(n, -1);
  for (std::size_t i = 0; i < n; ++i)
    if (in_domain[i]) {
      new_id[i] = static_cast<int>(out.atoms.atoms.size());
      Atom<D> a = window.atoms[i];
      a.id = new_id[i];
      out.atoms.atoms.push_back(a);
      out.xi.push_back(xi[i]);
    }
  out.atoms.kind = spec.kind;
  const std::vector<Vec<D>> cpts = out.atoms.positions();
  for (const auto* p : meeting) {
    ++out.pretriangulation_cells;
    if (p->ids.size() != static_cast<std::size_t>(D + 1) &&
        !(p->cells.size() == 1 && p->cells[0].shape == CellShape::Octahedron) && p->contained < 0)
      ++out.raw_cells;
    for (Cell c : p->cells) {
      for (int& v : c.v) v = new_id[v];
      out.tess.cells.push_back(std::move(c));
    }
  }
  out.graph = graph.remapped(new_id);
  finalize_triangulations<D>(cpts, out.tess);
  return out;
}

/// The closed-domain atom set of the biphase lattice.
template <int D>
AtomSet<D> generate_biphase(const LatticeSpec& spec, const StructureOptions& opt = {}) {
  return build_structure<D>(spec, opt).atoms;
}

}  // namespace misfit
