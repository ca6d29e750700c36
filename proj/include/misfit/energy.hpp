#pragma once

// Discrete harmonic pair energies of the biphase lattices and admissibility of
// deformations (positive orientation of every tetrahedron, convex octahedra).

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "misfit/errors.hpp"
#include "misfit/geometry.hpp"
#include "misfit/lattice.hpp"
#include "misfit/tessellation.hpp"

namespace misfit {

/// Deformed positions indexed by atom id.
template <int D>
using Deformation = std::vector<Vec<D>>;

enum class EnergyClass : std::uint8_t { LeftBulk, RightBulk, CrossInterface, NNN_1, NNN_2 };
inline constexpr int kEnergyClasses = 5;

inline std::string_view to_string(EnergyClass c) {
  switch (c) {
    case EnergyClass::LeftBulk: return "LeftBulk";
    case EnergyClass::RightBulk: return "RightBulk";
    case EnergyClass::CrossInterface: return "CrossInterface";
    case EnergyClass::NNN_1: return "NNN_1";
    case EnergyClass::NNN_2: return "NNN_2";
  }
  return "?";
}

struct BondTerm {
  double weight = 1.0;
  double rest = 1.0;
};

/// A bond expanded into the weighted harmonic terms of the double sums.
struct WeightedBond {
  int a = 0;
  int b = 0;
  std::array<BondTerm, 2> terms{};
  int nterms = 1;
  EnergyClass cls = EnergyClass::LeftBulk;

  [[nodiscard]] std::span<const BondTerm> active() const { return {terms.data(), static_cast<std::size_t>(nterms)}; }

  /// Minimum over the bond length of the bond energy (the misfit floor of cross bonds).
  [[nodiscard]] double floor_value() const {
    double w = 0.0, wr = 0.0;
    for (const auto& t : active()) {
      w += t.weight;
      wr += t.weight * t.rest;
    }
    double l = wr / w, e = 0.0;
    for (const auto& t : active()) e += t.weight * (l - t.rest) * (l - t.rest);
    return e;
  }
};

struct EnergyParams {
  double c1 = 1.0;  // next-to-nearest strength, sublattice 1
  double c2 = 1.0;  // next-to-nearest strength, sublattice 2
};

/// Rest length of BCC bonds as a smooth even function of the reference direction:
/// sqrt(2) along the axes, sqrt(6)/2 along the cube diagonals, interpolated through the
/// fourth-moment invariant q = v1^4 + v2^4 + v3^4.
inline double phi(const Vec<3>& v) {
  if (!std::isfinite(v.norm()) || std::abs(v.norm() - 1.0) > 1e-9) throw InputError("phi: direction must be a unit vector");
  const double q = v.array().pow(4).sum();
  const double s2 = std::sqrt(2.0), s6 = std::sqrt(6.0) / 2.0;
  return s6 + (s2 - s6) * (3.0 * q - 1.0) / 2.0;
}

/// Expands each bond into weighted terms following the paper's double sums: a bond
/// between two left atoms has one term with rest r, two right atoms rest lambda*r, and a
/// cross bond gets both at weight one half.
template <int D>
std::vector<WeightedBond> compile_bonds(const LatticeSpec& spec, const AtomSet<D>& atoms, const std::vector<Bond>& bonds,
                                        const EnergyParams& params = {}) {
  const auto lb = lattice_basis<D>(spec.kind);
  const bool sub = uses_sublattice_bonds(spec.kind);
  std::vector<WeightedBond> out;
  out.reserve(bonds.size());
  for (const auto& b : bonds) {
    if (b.a < 0 || b.b < 0 || b.a >= static_cast<int>(atoms.size()) || b.b >= static_cast<int>(atoms.size()))
      throw InternalError("bond refers to unknown atom");
    const auto& A = atoms.atoms[b.a];
    const auto& B = atoms.atoms[b.b];
    double r0 = 1.0, scale = 1.0;
    if (spec.kind == LatticeKind::BCC) {
      if constexpr (D == 3) r0 = phi((A.pos - B.pos).normalized());
    } else if (sub) {
      if (b.cls == BondClass::NNN) {
        if (A.sublattice != B.sublattice) throw InternalError("next-to-nearest bond across sublattices");
        r0 = lb.sublattice_spacing;
        scale = A.sublattice == 1 ? params.c1 : params.c2;
      } else {
        r0 = lb.nn_distance;
      }
    }
    WeightedBond w;
    w.a = b.a;
    w.b = b.b;
    if (A.phase == Phase::Left && B.phase == Phase::Left) {
      w.terms[0] = {scale, r0};
      w.cls = EnergyClass::LeftBulk;
    } else if (A.phase == Phase::Right && B.phase == Phase::Right) {
      w.terms[0] = {scale, spec.lambda * r0};
      w.cls = EnergyClass::RightBulk;
    } else {
      w.terms[0] = {0.5 * scale, r0};
      w.terms[1] = {0.5 * scale, spec.lambda * r0};
      w.nterms = 2;
      w.cls = EnergyClass::CrossInterface;
    }
    if (sub && b.cls == BondClass::NNN) w.cls = A.sublattice == 1 ? EnergyClass::NNN_1 : EnergyClass::NNN_2;
    out.push_back(w);
  }
  return out;
}

/// Pairwise (cascade) summation; fixed association order makes totals reproducible.
inline double pairwise_sum(std::span<const double> x) {
  if (x.size() <= 16) {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  const std::size_t h = x.size() / 2;
  return pairwise_sum(x.first(h)) + pairwise_sum(x.subspan(h));
}

struct EnergyBreakdown {
  double total = 0.0;
  std::array<double, kEnergyClasses> by_class{};

  [[nodiscard]] double operator[](EnergyClass c) const { return by_class[static_cast<int>(c)]; }
};

template <int D>
double bond_energy(const WeightedBond& b, const Deformation<D>& def) {
  const double l = (def[b.a] - def[b.b]).norm();
  double e = 0.0;
  for (const auto& t : b.active()) e += t.weight * (l - t.rest) * (l - t.rest);
  return e;
}

template <int D>
EnergyBreakdown energy(std::span<const WeightedBond> bonds, const Deformation<D>& def) {
  std::array<std::vector<double>, kEnergyClasses> parts;
  for (const auto& b : bonds) {
    if (std::max(b.a, b.b) >= static_cast<int>(def.size()))
      throw InputError("deformation misses atom " + std::to_string(std::max(b.a, b.b)));
    parts[static_cast<int>(b.cls)].push_back(bond_energy<D>(b, def));
  }
  EnergyBreakdown out;
  for (int c = 0; c < kEnergyClasses; ++c) out.by_class[c] = pairwise_sum(parts[c]);
  out.total = pairwise_sum(out.by_class);
  return out;
}

/// Ratio of deformed to reference simplex volume (the determinant of the affine map).
template <int D>
double cell_determinant(const Simplex<D>& s, const std::vector<Vec<D>>& ref, const Deformation<D>& def) {
  const double r = simplex_edges<D>(ref, s.data()).determinant();
  if (std::abs(r) < 1e-14) throw InternalError("degenerate reference simplex");
  return simplex_edges<D>(def, s.data()).determinant() / r;
}

struct AdmissibilityViolation {
  int cell = 0;     // index into the tessellation's cell list
  int split = -1;   // octahedra: opposite pair of the failing diagonal split
  double det = 0.0;
};

struct AdmissibilityReport {
  bool admissible = true;
  std::size_t violations = 0;
  std::vector<AdmissibilityViolation> first;  // at most 10
};

inline constexpr double kDetTol = 1e-12;

/// Admissible iff every simplex has positive determinant and every octahedron image is
/// convex, decided by positive determinants on all three of its diagonal splits.
template <int D>
AdmissibilityReport check_admissible(const std::vector<Cell>& cells, const std::vector<Vec<D>>& ref,
                                     const Deformation<D>& def) {
  AdmissibilityReport rep;
  auto note = [&](int cell, int split, double det) {
    rep.admissible = false;
    ++rep.violations;
    if (rep.first.size() < 10) rep.first.push_back({cell, split, det});
  };
  for (int c = 0; c < static_cast<int>(cells.size()); ++c) {
    const Cell& cell = cells[c];
    if (cell.shape == CellShape::Simplex) {
      Simplex<D> s;
      std::copy(cell.v.begin(), cell.v.end(), s.begin());
      double d = cell_determinant<D>(s, ref, def);
      if (!(d > kDetTol)) note(c, -1, d);
    } else if (cell.shape == CellShape::Octahedron) {
      if constexpr (D == 3) {
        for (int p = 0; p < 3; ++p) {
          double worst = std::numeric_limits<double>::infinity();
          for (const auto& t : octa_split<3>(ref, cell, p)) worst = std::min(worst, cell_determinant<3>(t, ref, def));
          if (!(worst > kDetTol)) note(c, p, worst);
        }
      }
    } else {
      throw InputError("check_admissible: raw polytope in tessellation");
    }
  }
  return rep;
}

/// Precompiled admissibility test: every simplex to check with its inverse reference
/// edge matrix, so that a check costs one small determinant per simplex.
template <int D>
class AdmissibilityChecker {
 public:
  AdmissibilityChecker() = default;
  AdmissibilityChecker(const std::vector<Cell>& cells, const std::vector<Vec<D>>& ref) {
    auto push = [&](const Simplex<D>& s) {
      Mat<D> e = simplex_edges<D>(ref, s.data());
      items_.push_back({s, 1.0 / e.determinant()});
    };
    for (const auto& c : cells) {
      if (c.shape == CellShape::Simplex) {
        Simplex<D> s;
        std::copy(c.v.begin(), c.v.end(), s.begin());
        push(s);
      } else if (c.shape == CellShape::Octahedron) {
        if constexpr (D == 3)
          for (int p = 0; p < 3; ++p)
            for (const auto& t : octa_split<3>(ref, c, p)) push(t);
      } else {
        throw InputError("admissibility: raw polytope in tessellation");
      }
    }
  }

  /// Smallest determinant ratio over all checked simplices.
  [[nodiscard]] double min_det(const Deformation<D>& def) const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& it : items_) m = std::min(m, simplex_edges<D>(def, it.s.data()).determinant() * it.inv_ref);
    return m;
  }
  [[nodiscard]] bool ok(const Deformation<D>& def) const { return min_det(def) > kDetTol; }
  [[nodiscard]] std::size_t size() const { return items_.size(); }

 private:
  struct Item {
    Simplex<D> s;
    double inv_ref;
  };
  std::vector<Item> items_;
};

}  // namespace misfit
