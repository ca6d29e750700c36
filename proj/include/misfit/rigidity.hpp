#pragma once

// Distance to rotations and numerical certification of the tetrahedron and
// octahedron rigidity estimates.

#include <Eigen/SVD>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "misfit/errors.hpp"
#include "misfit/geometry.hpp"
#include "misfit/seeds.hpp"

namespace misfit {

/// Frobenius distance from F to SO(3) for det F > 0: sqrt(sum (sigma_i - 1)^2).
inline double dist_SO3(const Mat<3>& F) {
  if (!F.allFinite()) throw InputError("dist_SO3: non-finite matrix");
  if (!(F.determinant() > 0.0)) throw DomainError("dist_SO3: det F must be positive");
  Eigen::JacobiSVD<Mat<3>> svd(F);
  return std::sqrt((svd.singularValues().array() - 1.0).square().sum());
}

/// Edge vectors w1..w6 of the unit regular tetrahedron.
inline const std::array<Vec<3>, 6>& tetra_frame() {
  static const std::array<Vec<3>, 6> w = [] {
    const double s3 = std::sqrt(3.0), s6 = std::sqrt(6.0);
    Vec<3> w1(1, 0, 0), w2(0.5, s3 / 2, 0), w4(0.5, s3 / 6, s6 / 3);
    return std::array<Vec<3>, 6>{w1, w2, w2 - w1, w4, w4 - w2, w4 - w1};
  }();
  return w;
}

struct RigidityGap {
  double lhs = 0.0;  // dist^2(F, SO(3))
  double rhs = 0.0;  // sum of squared edge-length defects
  [[nodiscard]] double ratio() const { return rhs > 0.0 ? lhs / rhs : std::numeric_limits<double>::quiet_NaN(); }
};

inline RigidityGap tetra_gap(const Mat<3>& F) {
  const double d = dist_SO3(F);
  RigidityGap g{d * d, 0.0};
  for (const auto& w : tetra_frame()) {
    double e = (F * w).norm() - 1.0;
    g.rhs += e * e;
  }
  return g;
}

/// The reference octahedron O with unit edges: square P1 P2 P4 P3 and apexes P5, P6.
inline const std::array<Vec<3>, 6>& reference_octahedron() {
  static const std::array<Vec<3>, 6> p = [] {
    const double h = std::sqrt(2.0) / 2;
    return std::array<Vec<3>, 6>{Vec<3>(0, 0, 0), Vec<3>(1, 0, 0),   Vec<3>(0, 1, 0),
                                 Vec<3>(1, 1, 0), Vec<3>(0.5, 0.5, h), Vec<3>(0.5, 0.5, -h)};
  }();
  return p;
}

/// The twelve edges of O (0-based vertex indices).
inline const std::array<std::array<int, 2>, 12>& octahedron_edges() {
  static const std::array<std::array<int, 2>, 12> e{{{0, 1}, {1, 3}, {3, 2}, {2, 0},  // square
                                                     {0, 4}, {1, 4}, {2, 4}, {3, 4},
                                                     {0, 5}, {1, 5}, {2, 5}, {3, 5}}};
  return e;
}

/// The three diagonals P1P4, P2P3, P5P6 of O.
inline constexpr std::array<std::array<int, 2>, 3> kOctaDiagonals{{{0, 3}, {1, 2}, {4, 5}}};

/// Tetrahedra of the split of O along diagonal `d` (index into kOctaDiagonals), each
/// positively oriented in the reference. d = 0 gives the four tetrahedra P1P4 with P2P5,
/// P5P3, P3P6 and P6P2.
inline std::array<std::array<int, 4>, 4> octa_diagonal_split(int d) {
  const auto& P = reference_octahedron();
  const auto [a, b] = kOctaDiagonals[d];
  std::array<int, 4> eq{};
  int m = 0;
  for (int i = 0; i < 6; ++i)
    if (i != a && i != b) eq[m++] = i;
  // equator in cyclic order: the pair opposite to each other must not be consecutive
  auto opposite = [](int i, int j) {
    for (auto dd : kOctaDiagonals)
      if ((dd[0] == i && dd[1] == j) || (dd[0] == j && dd[1] == i)) return true;
    return false;
  };
  if (opposite(eq[0], eq[1])) std::swap(eq[1], eq[2]);
  else if (opposite(eq[1], eq[2])) std::swap(eq[2], eq[3]);
  std::array<std::array<int, 4>, 4> out{};
  for (int i = 0; i < 4; ++i) {
    std::array<int, 4> t{a, b, eq[i], eq[(i + 1) % 4]};
    Mat<3> e;
    for (int c = 0; c < 3; ++c) e.col(c) = P[t[c + 1]] - P[t[0]];
    if (e.determinant() < 0) std::swap(t[2], t[3]);
    out[i] = t;
  }
  return out;
}

/// Gradient of the affine map sending reference tetrahedron t of O to its image.
inline Mat<3> tetra_gradient(const std::array<Vec<3>, 6>& img, const std::array<int, 4>& t) {
  const auto& P = reference_octahedron();
  Mat<3> r, d;
  for (int c = 0; c < 3; ++c) {
    r.col(c) = P[t[c + 1]] - P[t[0]];
    d.col(c) = img[t[c + 1]] - img[t[0]];
  }
  return d * r.inverse();
}

/// Minimal orientation determinant over the four tetrahedra of diagonal split d.
inline double octa_split_min_det(const std::array<Vec<3>, 6>& img, int d) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& t : octa_diagonal_split(d)) m = std::min(m, tetra_gradient(img, t).determinant());
  return m;
}

/// Convexity of the image with the combinatorics of O, decided directly: for every one of
/// the eight faces (outward in the reference), all other vertices lie strictly inside.
inline bool octa_image_convex(const std::array<Vec<3>, 6>& img, double tol = 1e-12) {
  const auto& P = reference_octahedron();
  Vec<3> c = Vec<3>::Zero();
  for (const auto& p : P) c += p;
  c /= 6.0;
  for (int apex : {4, 5})
    for (int s = 0; s < 4; ++s) {
      static constexpr int ring[4] = {0, 1, 3, 2};
      std::array<int, 3> f{apex, ring[s], ring[(s + 1) % 4]};
      Vec<3> nref = (P[f[1]] - P[f[0]]).cross(P[f[2]] - P[f[0]]);
      if (nref.dot(c - P[f[0]]) > 0) std::swap(f[1], f[2]);  // outward in the reference
      Vec<3> n = (img[f[1]] - img[f[0]]).cross(img[f[2]] - img[f[0]]);
      const double scale = std::max(1e-300, n.norm());
      for (int v = 0; v < 6; ++v) {
        if (v == f[0] || v == f[1] || v == f[2]) continue;
        if (!(n.dot(img[v] - img[f[0]]) / scale < -tol)) return false;
      }
    }
  return true;
}

/// Per-tetrahedron rigidity gaps of a deformed octahedron on the P1P4 split. The twelve
/// edge defects form the common right-hand side.
inline std::array<RigidityGap, 4> octa_gap(const std::array<Vec<3>, 6>& img) {
  for (int d = 0; d < 3; ++d)
    if (!(octa_split_min_det(img, d) > 0.0))
      throw DomainError("octa_gap: image is not a convex octahedron (diagonal split " + std::to_string(d) +
                        " has a non-positive determinant)");
  double rhs = 0.0;
  for (auto e : octahedron_edges()) {
    double l = (img[e[0]] - img[e[1]]).norm() - 1.0;
    rhs += l * l;
  }
  std::array<RigidityGap, 4> out;
  auto split = octa_diagonal_split(0);
  for (int i = 0; i < 4; ++i) {
    double d = dist_SO3(tetra_gradient(img, split[i]));
    out[i] = {d * d, rhs};
  }
  return out;
}

struct OctaDiagonal {
  double l3 = 0.0;       // signed chord |Q2Q5|; negative once the construction wraps past Q2
  double chord = 0.0;    // |Q2 - Q5| from the coordinates
  double diagonal = 0.0; // |Q1Q4|
  bool embedded = true;  // 3*gamma <= 2*pi, i.e. the equatorial polygon does not wrap
};

/// One-parameter family of octahedra with all edges of unit length except |Q2Q5|:
/// alpha is the angle between Q1Q2 and Q2Q4. Q2, Q6, Q3, Q5 lie on the circle of radius
/// cos(alpha/2) around the midpoint of Q1Q4 at consecutive central angles gamma, with
/// cos(gamma) = 1 - 1/(2 cos^2(alpha/2)).
inline OctaDiagonal octa_diagonal(double alpha) {
  if (!(alpha > 0.0 && alpha < std::numbers::pi)) throw DomainError("octa_diagonal: alpha must lie in (0, pi)");
  const double r = std::cos(alpha / 2.0);
  const double cg = 1.0 - 1.0 / (2.0 * r * r);
  if (cg < -1.0 - 1e-15 || cg > 1.0) throw DomainError("octa_diagonal: construction does not close (cos gamma outside [-1,1])");
  const double gamma = std::acos(std::clamp(cg, -1.0, 1.0));
  const double half = std::sin(alpha / 2.0);
  auto on_circle = [&](double t) { return Vec<3>(0.0, r * std::cos(t), r * std::sin(t)); };
  const Vec<3> Q1(-half, 0, 0), Q4(half, 0, 0);
  const Vec<3> Q2 = on_circle(0.0), Q6 = on_circle(gamma), Q3 = on_circle(2 * gamma), Q5 = on_circle(3 * gamma);
  for (const Vec<3>* q : {&Q2, &Q3, &Q5, &Q6})
    if (std::abs((*q - Q1).norm() - 1.0) > 1e-12 || std::abs((*q - Q4).norm() - 1.0) > 1e-12)
      throw InternalError("octa_diagonal: construction lost unit edges");
  OctaDiagonal out;
  out.chord = (Q2 - Q5).norm();
  out.l3 = std::sin(1.5 * gamma) >= 0.0 ? out.chord : -out.chord;
  out.diagonal = (Q1 - Q4).norm();
  out.embedded = 3.0 * gamma <= 2.0 * std::numbers::pi + 1e-12;
  return out;
}

/// Closed form of the signed diagonal length.
inline double octa_l3_closed_form(double alpha) {
  const double c = std::cos(alpha / 2.0);
  return 3.0 - 1.0 / (c * c);
}

// ---------------------------------------------------------------------------------
// Sampling of constants

inline Mat<3> random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

inline constexpr std::array<double, 4> kPerturbationScales{0.01, 0.1, 0.3, 1.0};

/// F = R (I + E), R uniform on SO(3), E entrywise uniform in [-s, s], det F > 0.
inline Mat<3> sample_near_rotation(std::mt19937_64& rng, double s) {
  std::uniform_real_distribution<double> u(-s, s);
  while (true) {
    Mat<3> E;
    for (int i = 0; i < 9; ++i) E(i / 3, i % 3) = u(rng);
    Mat<3> F = random_rotation(rng) * (Mat<3>::Identity() + E);
    if (F.determinant() > 0.0) return F;
  }
}

/// Admissible vertexwise perturbation of O with noise uniform in [-s, s] per coordinate.
inline std::array<Vec<3>, 6> sample_octahedron(std::mt19937_64& rng, double s, bool require_convex = true) {
  std::uniform_real_distribution<double> u(-s, s);
  while (true) {
    auto img = reference_octahedron();
    for (auto& p : img)
      for (int i = 0; i < 3; ++i) p[i] += u(rng);
    if (!require_convex) return img;
    bool ok = true;
    for (int d = 0; d < 3 && ok; ++d) ok = octa_split_min_det(img, d) > 0.0;
    if (ok) return img;
  }
}

struct ConstantFit {
  double constant = 0.0;      // fitted envelope (max ratio times margin)
  double max_ratio = 0.0;     // largest observed ratio on the fitting sample
  std::size_t samples = 0;
  std::size_t refinements = 0;  // local maximisation steps that raised the envelope
  std::vector<std::size_t> histogram;  // counts of log10(ratio) in unit bins from -3
};

struct ValidationResult {
  std::size_t samples = 0;
  std::size_t violations = 0;
  double max_ratio = 0.0;
};

namespace detail {

inline void add_to_histogram(std::vector<std::size_t>& h, double ratio) {
  if (h.empty()) h.assign(8, 0);
  if (!(ratio > 0.0)) return;
  int bin = static_cast<int>(std::floor(std::log10(ratio))) + 3;
  h[static_cast<std::size_t>(std::clamp(bin, 0, 7))]++;
}

/// Local maximisation of a ratio by random-restart coordinate perturbation; returns the
/// best value found starting from x.
template <class X, class Ratio, class Perturb>
double local_maximise(X x, Ratio&& ratio, Perturb&& perturb, std::mt19937_64& rng, int iters) {
  double best = ratio(x);
  double step = 0.05;
  for (int it = 0; it < iters; ++it) {
    X y = perturb(x, step, rng);
    double r = ratio(y);
    if (r > best) {
      best = r;
      x = y;
    } else if (it % 50 == 49) {
      step *= 0.7;
    }
  }
  return best;
}

}  // namespace detail

inline double tetra_ratio(const Mat<3>& F) {
  if (!(F.determinant() > 0.0)) return 0.0;
  auto g = tetra_gap(F);
  return g.rhs > 1e-300 ? g.lhs / g.rhs : 0.0;
}

inline double octa_ratio(const std::array<Vec<3>, 6>& img) {
  for (int d = 0; d < 3; ++d)
    if (!(octa_split_min_det(img, d) > 0.0)) return 0.0;
  double best = 0.0;
  for (const auto& g : octa_gap(img))
    if (g.rhs > 1e-300) best = std::max(best, g.lhs / g.rhs);
  return best;
}

/// Fits the tetrahedron constant on `samples` draws cycling through the perturbation
/// scales; the envelope is 1.1 times the largest ratio after locally maximising the
/// twenty worst draws.
inline ConstantFit fit_tetra_constant(std::size_t samples, std::uint64_t seed, int refine_iters = 2000) {
  std::mt19937_64 rng(seed);
  ConstantFit fit;
  fit.samples = samples;
  std::vector<std::pair<double, Mat<3>>> worst;
  for (std::size_t i = 0; i < samples; ++i) {
    Mat<3> F = sample_near_rotation(rng, kPerturbationScales[i % kPerturbationScales.size()]);
    double r = tetra_ratio(F);
    detail::add_to_histogram(fit.histogram, r);
    fit.max_ratio = std::max(fit.max_ratio, r);
    worst.emplace_back(r, F);
    if (worst.size() > 64) {
      std::nth_element(worst.begin(), worst.begin() + 20, worst.end(),
                       [](const auto& a, const auto& b) { return a.first > b.first; });
      worst.resize(20);
    }
  }
  std::sort(worst.begin(), worst.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  if (worst.size() > 20) worst.resize(20);
  double envelope = fit.max_ratio;
  auto perturb = [](Mat<3> F, double step, std::mt19937_64& g) {
    std::normal_distribution<double> n(0.0, step);
    for (int i = 0; i < 9; ++i) F(i / 3, i % 3) += n(g) * std::max(1.0, F.norm() / 3.0);
    return F;
  };
  for (const auto& w : worst) {
    double r = detail::local_maximise(w.second, tetra_ratio, perturb, rng, refine_iters);
    if (r > envelope) {
      envelope = r;
      ++fit.refinements;
    }
  }
  fit.constant = 1.1 * envelope;
  return fit;
}

inline ValidationResult validate_tetra_constant(double C, std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ValidationResult v;
  v.samples = samples;
  for (std::size_t i = 0; i < samples; ++i) {
    Mat<3> F = sample_near_rotation(rng, kPerturbationScales[i % kPerturbationScales.size()]);
    auto g = tetra_gap(F);
    v.max_ratio = std::max(v.max_ratio, tetra_ratio(F));
    if (g.lhs > C * g.rhs) ++v.violations;
  }
  return v;
}

inline constexpr double kOctaNoise = 0.1;

inline ConstantFit fit_octa_constant(std::size_t samples, std::uint64_t seed, int refine_iters = 2000) {
  std::mt19937_64 rng(seed);
  ConstantFit fit;
  fit.samples = samples;
  std::vector<std::pair<double, std::array<Vec<3>, 6>>> all;
  for (std::size_t i = 0; i < samples; ++i) {
    auto img = sample_octahedron(rng, kOctaNoise);
    double r = octa_ratio(img);
    detail::add_to_histogram(fit.histogram, r);
    fit.max_ratio = std::max(fit.max_ratio, r);
    all.emplace_back(r, img);
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  if (all.size() > 20) all.resize(20);
  double envelope = fit.max_ratio;
  auto perturb = [](std::array<Vec<3>, 6> img, double step, std::mt19937_64& g) {
    std::normal_distribution<double> n(0.0, step * kOctaNoise);
    const auto& P = reference_octahedron();
    for (int v = 0; v < 6; ++v)
      for (int i = 0; i < 3; ++i)
        img[v][i] = P[v][i] + std::clamp(img[v][i] - P[v][i] + n(g), -kOctaNoise, kOctaNoise);
    return img;
  };
  for (const auto& w : all) {
    double r = detail::local_maximise(w.second, octa_ratio, perturb, rng, refine_iters);
    if (r > envelope) {
      envelope = r;
      ++fit.refinements;
    }
  }
  fit.constant = 1.1 * envelope;
  return fit;
}

inline ValidationResult validate_octa_constant(double C, std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ValidationResult v;
  v.samples = samples;
  for (std::size_t i = 0; i < samples; ++i) {
    auto img = sample_octahedron(rng, kOctaNoise);
    for (const auto& g : octa_gap(img)) {
      if (g.rhs > 0.0) v.max_ratio = std::max(v.max_ratio, g.lhs / g.rhs);
      if (g.lhs > C * g.rhs) ++v.violations;
    }
  }
  return v;
}

struct ConvexityEquivalence {
  std::size_t samples = 0;
  std::size_t convex = 0;         // samples on which both sides hold
  std::size_t discrepancies = 0;
};

/// For random vertex perturbations of O: [split P1P4 positive and image convex by the
/// direct face test] versus [all three diagonal splits positive].
inline ConvexityEquivalence check_convexity_equivalence(std::size_t samples, std::uint64_t seed, double noise = 0.35) {
  std::mt19937_64 rng(seed);
  ConvexityEquivalence out;
  out.samples = samples;
  for (std::size_t i = 0; i < samples; ++i) {
    auto img = sample_octahedron(rng, noise, false);
    bool lhs = octa_split_min_det(img, 0) > 0.0 && octa_image_convex(img);
    bool rhs = true;
    for (int d = 0; d < 3; ++d) rhs &= octa_split_min_det(img, d) > 0.0;
    if (lhs != rhs) ++out.discrepancies;
    if (lhs && rhs) ++out.convex;
  }
  return out;
}

}  // namespace misfit
