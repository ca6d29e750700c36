#pragma once

// Bulk and biphase lattice generation for FCC, HCP, BCC, diamond cubic and the
// planar honeycomb lattice, plus the nanowire slab in lattice coordinates.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "misfit/errors.hpp"
#include "misfit/geometry.hpp"

namespace misfit {

enum class LatticeKind { FCC, HCP, BCC, DC, Honeycomb2D };

constexpr int dimension_of(LatticeKind kind) { return kind == LatticeKind::Honeycomb2D ? 2 : 3; }

/// Kinds whose bonds come from the two-sublattice construction rather than the
/// rigid Delaunay tessellation of the whole lattice.
constexpr bool uses_sublattice_bonds(LatticeKind kind) {
  return kind == LatticeKind::DC || kind == LatticeKind::Honeycomb2D;
}

inline std::string_view to_string(LatticeKind kind) {
  switch (kind) {
    case LatticeKind::FCC: return "fcc";
    case LatticeKind::HCP: return "hcp";
    case LatticeKind::BCC: return "bcc";
    case LatticeKind::DC: return "dc";
    case LatticeKind::Honeycomb2D: return "honeycomb";
  }
  return "?";
}

inline LatticeKind parse_kind(std::string_view s) {
  if (s == "fcc") return LatticeKind::FCC;
  if (s == "hcp") return LatticeKind::HCP;
  if (s == "bcc") return LatticeKind::BCC;
  if (s == "dc" || s == "diamond") return LatticeKind::DC;
  if (s == "honeycomb" || s == "honeycomb2d") return LatticeKind::Honeycomb2D;
  throw InputError("unknown lattice kind '" + std::string(s) + "'");
}

enum class Phase : std::uint8_t { Left, Right };

/// Generators (matrix columns) and basis vectors of a lattice kind, with the bulk
/// bond lengths the energies and neighbour searches are calibrated against.
template <int D>
struct LatticeBasis {
  Mat<D> generators;
  std::vector<Vec<D>> basis;
  double nn_distance;       // bulk nearest-neighbour distance
  double max_bond_length;   // longest bulk bond entering the energy
  double sublattice_spacing;  // NN distance within one sublattice (sublattice kinds)
};

template <int D>
LatticeBasis<D> lattice_basis(LatticeKind kind) {
  if (dimension_of(kind) != D) throw InputError("lattice kind " + std::string(to_string(kind)) + " has dimension " +
                                                std::to_string(dimension_of(kind)));
  LatticeBasis<D> b;
  if constexpr (D == 3) {
    const double s2 = std::sqrt(2.0), s3 = std::sqrt(3.0), s6 = std::sqrt(6.0);
    switch (kind) {
      case LatticeKind::FCC:
      case LatticeKind::DC:
        b.generators.col(0) = s2 * Vec<3>(1, 0, 0);
        b.generators.col(1) = s2 * Vec<3>(0.5, 0.5, 0);
        b.generators.col(2) = s2 * Vec<3>(0, 0.5, 0.5);
        b.basis = {Vec<3>::Zero()};
        b.nn_distance = 1.0;
        b.max_bond_length = 1.0;
        b.sublattice_spacing = 1.0;
        if (kind == LatticeKind::DC) {
          b.basis.push_back(s2 * Vec<3>(0.25, 0.25, 0.25));
          b.nn_distance = s6 / 4.0;
        }
        break;
      case LatticeKind::HCP:
        b.generators.col(0) = Vec<3>(0, 0, 2.0 * s6 / 3.0);
        b.generators.col(1) = Vec<3>(0.5, s3 / 2.0, 0);
        b.generators.col(2) = Vec<3>(-0.5, s3 / 2.0, 0);
        b.basis = {Vec<3>::Zero(), Vec<3>(0, s3 / 3.0, s6 / 3.0)};
        b.nn_distance = 1.0;
        b.max_bond_length = 1.0;
        b.sublattice_spacing = 1.0;
        break;
      case LatticeKind::BCC:
        b.generators.col(0) = (s2 / 2.0) * Vec<3>(-1, 1, 1);
        b.generators.col(1) = (s2 / 2.0) * Vec<3>(1, -1, 1);
        b.generators.col(2) = (s2 / 2.0) * Vec<3>(1, 1, -1);
        b.basis = {Vec<3>::Zero()};
        b.nn_distance = s6 / 2.0;
        b.max_bond_length = s2;
        b.sublattice_spacing = s6 / 2.0;
        break;
      default: break;
    }
  } else {
    const double s3 = std::sqrt(3.0);
    b.generators.col(0) = Vec<2>(1, 0);
    b.generators.col(1) = Vec<2>(0.5, s3 / 2.0);
    b.basis = {Vec<2>::Zero(), Vec<2>(0, s3 / 3.0)};
    b.nn_distance = s3 / 3.0;
    b.max_bond_length = 1.0;
    b.sublattice_spacing = 1.0;
  }
  return b;
}

struct LatticeSpec {
  LatticeKind kind = LatticeKind::FCC;
  double rho = 1.0;     // reference spacing ratio of the right phase
  double lambda = 1.0;  // equilibrium spacing ratio of the right phase
  int k = 1;            // wire thickness in cells
  double M = 4.0;       // half-length of the slab along the first generator

  void validate() const {
    if (!(rho > 0.0 && rho <= 1.0)) throw InputError("rho out of (0,1]");
    if (!(lambda > 0.0 && lambda <= 1.0)) throw InputError("lambda out of (0,1]");
    if (k < 1) throw InputError("k must be >= 1");
    if (!(M > 0.0) || !std::isfinite(M)) throw InputError("M must be positive and finite");
  }

  /// lambda <= rho <= 1, the regime where both branches compete.
  [[nodiscard]] bool interesting_regime() const { return lambda <= rho && rho <= 1.0; }
};

template <int D>
struct Atom {
  int id = 0;
  Vec<D> pos;
  Phase phase = Phase::Left;
  int sublattice = 1;
  std::array<int, D> cell{};  // integer lattice index n; the right phase sits at rho*n
};

template <int D>
struct AtomSet {
  LatticeKind kind = LatticeKind::FCC;
  std::vector<Atom<D>> atoms;

  [[nodiscard]] std::size_t size() const { return atoms.size(); }
  [[nodiscard]] std::vector<Vec<D>> positions() const {
    std::vector<Vec<D>> p;
    p.reserve(atoms.size());
    for (const auto& a : atoms) p.push_back(a.pos);
    return p;
  }
};

struct AxisRange {
  double lo = 0.0;
  double hi = 0.0;
};

/// Lattice points sum_i xi_i v_i + u_j with integer xi inside the closed box,
/// ordered lexicographically in (xi_1, ..., xi_D, j). Phase is Left for xi_1 < 0.
template <int D>
AtomSet<D> generate_bulk(LatticeKind kind, const std::array<AxisRange, D>& box) {
  for (const auto& r : box)
    if (!std::isfinite(r.lo) || !std::isfinite(r.hi)) throw InputError("non-finite lattice box range");
  const auto lb = lattice_basis<D>(kind);
  AtomSet<D> out;
  out.kind = kind;
  std::array<int, D> lo{}, hi{};
  for (int i = 0; i < D; ++i) {
    lo[i] = static_cast<int>(std::ceil(box[i].lo));
    hi[i] = static_cast<int>(std::floor(box[i].hi));
    if (lo[i] > hi[i]) return out;
  }
  std::array<int, D> n = lo;
  while (true) {
    Vec<D> xi;
    for (int i = 0; i < D; ++i) xi[i] = n[i];
    for (std::size_t j = 0; j < lb.basis.size(); ++j) {
      Atom<D> a;
      a.id = static_cast<int>(out.atoms.size());
      a.pos = lb.generators * xi + lb.basis[j];
      a.phase = n[0] < 0 ? Phase::Left : Phase::Right;
      a.sublattice = static_cast<int>(j) + 1;
      a.cell = n;
      out.atoms.push_back(a);
    }
    int axis = D - 1;
    while (axis >= 0 && ++n[axis] > hi[axis]) {
      n[axis] = lo[axis];
      --axis;
    }
    if (axis < 0) break;
  }
  return out;
}

/// Parallelepiped {sum xi_i v_i : lo_i < xi_i < hi_i} in lattice coordinates.
template <int D>
struct Parallelepiped {
  Mat<D> V;
  Mat<D> Vinv;
  Vec<D> lo;
  Vec<D> hi;

  Parallelepiped() = default;
  Parallelepiped(const Mat<D>& generators, const Vec<D>& lo_, const Vec<D>& hi_)
      : V(generators), Vinv(generators.inverse()), lo(lo_), hi(hi_) {}

  [[nodiscard]] Vec<D> coords(const Vec<D>& x) const { return Vinv * x; }

  [[nodiscard]] bool contains_open(const Vec<D>& x, double tol = 0.0) const {
    Vec<D> xi = coords(x);
    for (int i = 0; i < D; ++i)
      if (!(xi[i] > lo[i] + tol && xi[i] < hi[i] - tol)) return false;
    return true;
  }

  /// Euclidean distance from an interior point to the nearest face.
  [[nodiscard]] double distance_to_boundary(const Vec<D>& x) const {
    Vec<D> xi = coords(x);
    double d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < D; ++i) {
      double row = Vinv.row(i).norm();
      d = std::min(d, (xi[i] - lo[i]) / row);
      d = std::min(d, (hi[i] - xi[i]) / row);
    }
    return d;
  }

  [[nodiscard]] double volume() const { return std::abs(V.determinant()) * (hi - lo).prod(); }

  /// Faces as half-spaces in Cartesian coordinates (for clipping).
  [[nodiscard]] std::vector<Halfspace<D>> halfspaces() const {
    std::vector<Halfspace<D>> hs;
    for (int i = 0; i < D; ++i) {
      Vec<D> row = Vinv.row(i).transpose();
      double len = row.norm();
      hs.push_back({-row / len, -lo[i] / len, kBoxTag});
      hs.push_back({row / len, hi[i] / len, kBoxTag});
    }
    return hs;
  }
};

/// The nanowire slab: xi_1 in (-M, M), remaining xi in (0, k).
template <int D>
struct WireDomain {
  Parallelepiped<D> slab;
  double M = 0.0;
  int k = 0;

  [[nodiscard]] Vec<D> coords(const Vec<D>& x) const { return slab.coords(x); }
  [[nodiscard]] bool inside(const Vec<D>& x) const { return slab.contains_open(x); }
  [[nodiscard]] bool in_left_half(const Vec<D>& x) const { return inside(x) && coords(x)[0] < 0.0; }
  [[nodiscard]] bool in_right_half(const Vec<D>& x) const { return inside(x) && coords(x)[0] >= 0.0; }
  [[nodiscard]] double volume() const { return slab.volume(); }
};

template <int D>
WireDomain<D> wire_domain(const LatticeSpec& spec) {
  spec.validate();
  const auto lb = lattice_basis<D>(spec.kind);
  Vec<D> lo = Vec<D>::Zero(), hi = Vec<D>::Constant(static_cast<double>(spec.k));
  lo[0] = -spec.M;
  hi[0] = spec.M;
  return WireDomain<D>{Parallelepiped<D>(lb.generators, lo, hi), spec.M, spec.k};
}

/// Biphase lattice restricted to the slab enlarged by `margin` lattice units on every
/// side. Left atoms are u_i + sum n_j v_j with n_1 < 0; right atoms are
/// rho (u_i + sum n_j v_j) with n_1 >= 0. Every lattice point of the biphase lattice
/// inside the returned region is present, so cells whose circumballs lie inside it are
/// exact cells of the infinite lattice.
template <int D>
AtomSet<D> generate_window(const LatticeSpec& spec, double margin, Parallelepiped<D>* region_out = nullptr) {
  spec.validate();
  const auto lb = lattice_basis<D>(spec.kind);
  Vec<D> lo = Vec<D>::Constant(-margin), hi = Vec<D>::Constant(spec.k + margin);
  lo[0] = -spec.M - margin;
  hi[0] = spec.M + margin;
  Parallelepiped<D> region(lb.generators, lo, hi);
  if (region_out) *region_out = region;

  struct Candidate {
    Vec<D> xi;  // lattice coordinate of the generator part (rho*n on the right)
    int j;
    Atom<D> atom;
  };
  std::vector<Candidate> cands;
  for (int side = 0; side < 2; ++side) {
    const double scale = side == 0 ? 1.0 : spec.rho;
    std::array<int, D> nlo{}, nhi{};
    for (int i = 0; i < D; ++i) {
      nlo[i] = static_cast<int>(std::floor(lo[i] / scale)) - 2;
      nhi[i] = static_cast<int>(std::ceil(hi[i] / scale)) + 2;
    }
    if (side == 0) nhi[0] = std::min(nhi[0], -1);
    else nlo[0] = std::max(nlo[0], 0);
    if (nlo[0] > nhi[0]) continue;
    std::array<int, D> n = nlo;
    while (true) {
      Vec<D> nv;
      for (int i = 0; i < D; ++i) nv[i] = n[i];
      for (std::size_t j = 0; j < lb.basis.size(); ++j) {
        Vec<D> pos = scale * (lb.generators * nv + lb.basis[j]);
        if (region.contains_open(pos)) {
          Atom<D> a;
          a.pos = pos;
          a.phase = side == 0 ? Phase::Left : Phase::Right;
          a.sublattice = static_cast<int>(j) + 1;
          a.cell = n;
          cands.push_back({scale * nv, static_cast<int>(j), a});
        }
      }
      int axis = D - 1;
      while (axis >= 0 && ++n[axis] > nhi[axis]) {
        n[axis] = nlo[axis];
        --axis;
      }
      if (axis < 0) break;
    }
  }
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
    for (int i = 0; i < D; ++i)
      if (a.xi[i] != b.xi[i]) return a.xi[i] < b.xi[i];
    return a.j < b.j;
  });
  AtomSet<D> out;
  out.kind = spec.kind;
  out.atoms.reserve(cands.size());
  for (auto& c : cands) {
    c.atom.id = static_cast<int>(out.atoms.size());
    out.atoms.push_back(c.atom);
  }
  return out;
}

}  // namespace misfit
