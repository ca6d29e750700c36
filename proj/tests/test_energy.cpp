#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "misfit/energy.hpp"
#include "misfit/relax.hpp"
#include "misfit/structure.hpp"

using namespace misfit;

namespace {

const Structure<3>& fcc_slab(double rho, double lambda) {
  static std::map<std::pair<double, double>, Structure<3>> cache;
  auto key = std::make_pair(rho, lambda);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, build_structure<3>({LatticeKind::FCC, rho, lambda, 2, 3.0})).first;
  return it->second;
}

// Ordered double sum over bond endpoints: x in the left phase pays half of (|.| - r),
// x in the right phase half of (|.| - lambda r).
template <int D>
double double_sum_oracle(const Structure<D>& st, const Deformation<D>& def, double lambda) {
  long double s = 0.0L;
  for (const auto& b : st.graph.edges()) {
    const double l = (def[b.a] - def[b.b]).norm();
    for (int x : {b.a, b.b}) {
      const double rest = st.atoms.atoms[x].phase == Phase::Left ? 1.0 : lambda;
      s += 0.5L * (l - rest) * (l - rest);
    }
  }
  return static_cast<double>(s);
}

}  // namespace

TEST(Phi, AxisAndDiagonalValues) {
  EXPECT_NEAR(phi(Vec<3>(1, 0, 0)), std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(phi(Vec<3>(0, 0, -1)), std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(phi(Vec<3>(1, 1, 1).normalized()), std::sqrt(6.0) / 2, 1e-15);
  EXPECT_NEAR(phi(Vec<3>(-1, 1, -1).normalized()), std::sqrt(6.0) / 2, 1e-15);
  EXPECT_THROW(phi(Vec<3>(1, 1, 0)), InputError);
}

TEST(CompileBonds, WeightsFollowPhases) {
  LatticeSpec spec{LatticeKind::FCC, 1.0, 0.8, 1, 1.0};
  AtomSet<3> atoms;
  atoms.kind = LatticeKind::FCC;
  atoms.atoms = {{0, Vec<3>(-1, 0, 0), Phase::Left, 1, {}}, {1, Vec<3>(0, 0, 0), Phase::Left, 1, {}},
                 {2, Vec<3>(1, 0, 0), Phase::Right, 1, {}}, {3, Vec<3>(2, 0, 0), Phase::Right, 1, {}}};
  auto wb = compile_bonds<3>(spec, atoms, {{0, 1, BondClass::NN}, {1, 2, BondClass::NN}, {2, 3, BondClass::NN}});
  ASSERT_EQ(wb.size(), 3u);
  EXPECT_EQ(wb[0].cls, EnergyClass::LeftBulk);
  EXPECT_EQ(wb[0].nterms, 1);
  EXPECT_DOUBLE_EQ(wb[0].terms[0].rest, 1.0);
  EXPECT_EQ(wb[1].cls, EnergyClass::CrossInterface);
  EXPECT_EQ(wb[1].nterms, 2);
  EXPECT_DOUBLE_EQ(wb[1].terms[0].weight, 0.5);
  EXPECT_DOUBLE_EQ(wb[1].terms[1].rest, 0.8);
  EXPECT_EQ(wb[2].cls, EnergyClass::RightBulk);
  EXPECT_DOUBLE_EQ(wb[2].terms[0].rest, 0.8);
  // the cheapest cross bond sits halfway between the rest lengths
  EXPECT_NEAR(wb[1].floor_value(), 0.01, 1e-15);
  EXPECT_THROW(compile_bonds<3>(spec, atoms, {{0, 7, BondClass::NN}}), InternalError);
}

TEST(CompileBonds, SublatticeRestLengthsAndStrengths) {
  const auto st = build_structure<2>({LatticeKind::Honeycomb2D, 1.0, 1.0, 2, 3.0});
  EnergyParams p{2.0, 3.0};
  auto wb = compile_bonds<2>(st.spec, st.atoms, st.graph.edges(), p);
  const double nn = lattice_basis<2>(LatticeKind::Honeycomb2D).nn_distance;
  int n1 = 0, n2 = 0;
  for (const auto& b : wb) {
    const double l = (st.atoms.atoms[b.a].pos - st.atoms.atoms[b.b].pos).norm();
    EXPECT_NEAR(l, b.terms[0].rest, 1e-9);
    double w = 0.0;
    for (const auto& t : b.active()) w += t.weight;
    if (b.cls == EnergyClass::NNN_1) {
      ++n1;
      EXPECT_DOUBLE_EQ(w, 2.0);
    }
    if (b.cls == EnergyClass::NNN_2) {
      ++n2;
      EXPECT_DOUBLE_EQ(w, 3.0);
    }
    if (b.cls == EnergyClass::LeftBulk || b.cls == EnergyClass::RightBulk) EXPECT_NEAR(b.terms[0].rest, nn, 1e-15);
  }
  EXPECT_GT(n1, 0);
  EXPECT_GT(n2, 0);
}

TEST(Energy, ZeroAtEquilibrium) {
  for (auto kind : {LatticeKind::FCC, LatticeKind::HCP, LatticeKind::BCC, LatticeKind::DC}) {
    const auto st = build_structure<3>({kind, 1.0, 1.0, 1, 2.0});
    auto wb = compile_bonds<3>(st.spec, st.atoms, st.graph.edges());
    EXPECT_LT(energy<3>(wb, st.positions()).total, 1e-24) << to_string(kind);
    for (const auto& g : energy_gradient<3>(wb, st.positions())) EXPECT_LT(g.norm(), 1e-12);
  }
}

TEST(Energy, SingleStretchedBond) {
  std::vector<WeightedBond> wb(1);
  wb[0].a = 0;
  wb[0].b = 1;
  const double t = 0.3;
  Deformation<3> def{Vec<3>::Zero(), Vec<3>(1 + t, 0, 0)};
  EXPECT_NEAR(energy<3>(wb, def).total, t * t, 1e-15);
  auto g = energy_gradient<3>(wb, def);
  EXPECT_NEAR(g[0].x(), -2 * t, 1e-15);
  EXPECT_NEAR(g[1].x(), 2 * t, 1e-15);
  def[1] = def[0];
  EXPECT_THROW(energy_gradient<3>(wb, def), DomainError);
}

TEST(Energy, IdentityEnergyMatchesDoubleSum) {
  for (double lambda : {0.8, 0.9}) {
    const auto& st = fcc_slab(lambda, lambda);
    auto wb = compile_bonds<3>(st.spec, st.atoms, st.graph.edges());
    const auto e = energy<3>(wb, st.positions());
    EXPECT_NEAR(e.total, double_sum_oracle<3>(st, st.positions(), lambda), 1e-12);
    EXPECT_GT(e[EnergyClass::CrossInterface], 0.0);
    EXPECT_LT(e[EnergyClass::LeftBulk] + e[EnergyClass::RightBulk], 1e-20);
  }
}

TEST(Energy, DoubleSumOnRandomDeformation) {
  const auto& st = fcc_slab(0.9, 0.8);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 0.05);
  auto def = st.positions();
  for (auto& x : def) x += Vec<3>(n(rng), n(rng), n(rng));
  auto wb = compile_bonds<3>(st.spec, st.atoms, st.graph.edges());
  EXPECT_NEAR(energy<3>(wb, def).total, double_sum_oracle<3>(st, def, 0.8), 1e-12);
}

TEST(Energy, TranslationInvariance) {
  const auto& st = fcc_slab(0.8, 0.8);
  auto wb = compile_bonds<3>(st.spec, st.atoms, st.graph.edges());
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 0.03);
  auto def = st.positions();
  for (auto& x : def) x += Vec<3>(n(rng), n(rng), n(rng));
  auto moved = def;
  for (auto& x : moved) x += Vec<3>(3.5, -2.25, 7.0);
  EXPECT_NEAR(energy<3>(wb, def).total, energy<3>(wb, moved).total, 1e-10);
}

TEST(Energy, BreakdownSumsToTotal) {
  const auto& st = fcc_slab(0.9, 0.8);
  auto wb = compile_bonds<3>(st.spec, st.atoms, st.graph.edges());
  auto def = st.positions();
  for (auto& x : def) x *= 0.95;
  const auto e = energy<3>(wb, def);
  double s = 0;
  for (double v : e.by_class) s += v;
  EXPECT_NEAR(s, e.total, 1e-12 * e.total);
}

TEST(Energy, GradientMatchesCentralDifferences) {
  const auto& st = fcc_slab(0.9, 0.8);
  auto wb = compile_bonds<3>(st.spec, st.atoms, st.graph.edges());
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 0.03);
  auto def = st.positions();
  for (auto& x : def) x += Vec<3>(n(rng), n(rng), n(rng));
  ASSERT_TRUE(check_admissible<3>(st.tess.cells, st.positions(), def).admissible);
  const auto g = energy_gradient<3>(wb, def);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(def.size()) - 1);
  const double h = 1e-6;
  for (int s = 0; s < 40; ++s) {
    const int a = pick(rng), c = s % 3;
    std::vector<WeightedBond> local;
    for (const auto& b : wb)
      if (b.a == a || b.b == a) local.push_back(b);
    auto p = def, m = def;
    p[a][c] += h;
    m[a][c] -= h;
    const double fd = (energy<3>(local, p).total - energy<3>(local, m).total) / (2 * h);
    EXPECT_LT(std::abs(fd - g[a][c]), 1e-6 * std::max(std::abs(g[a][c]), 1e-3)) << "atom " << a << " coord " << c;
  }
}

TEST(PairwiseSum, ExactOnRepresentableData) {
  std::vector<double> v(1000, 0.125);
  EXPECT_EQ(pairwise_sum(v), 125.0);
  EXPECT_EQ(pairwise_sum(std::vector<double>{}), 0.0);
}

TEST(Admissibility, IdentityAndScalingsPass) {
  const auto& st = fcc_slab(0.8, 0.8);
  const auto ref = st.positions();
  EXPECT_TRUE(check_admissible<3>(st.tess.cells, ref, ref).admissible);
  auto def = ref;
  for (auto& x : def) x = 0.7 * x + Vec<3>(1, 2, 3);
  AdmissibilityChecker<3> chk(st.tess.cells, ref);
  EXPECT_TRUE(chk.ok(def));
  EXPECT_NEAR(chk.min_det(def), 0.343, 1e-12);
}

TEST(Admissibility, ReflectionFails) {
  const auto& st = fcc_slab(0.8, 0.8);
  const auto ref = st.positions();
  auto def = ref;
  for (auto& x : def) x.z() = -x.z();
  auto rep = check_admissible<3>(st.tess.cells, ref, def);
  EXPECT_FALSE(rep.admissible);
  EXPECT_EQ(rep.first.size(), 10u);
  EXPECT_GT(rep.violations, 10u);
  EXPECT_FALSE(AdmissibilityChecker<3>(st.tess.cells, ref).ok(def));
}

TEST(Admissibility, PushingAnOctahedronApexThroughItsEquatorFails) {
  const auto& st = fcc_slab(1.0, 1.0);
  const auto ref = st.positions();
  int oc = -1;
  for (int c = 0; c < static_cast<int>(st.tess.cells.size()); ++c)
    if (st.tess.cells[c].shape == CellShape::Octahedron) oc = c;
  ASSERT_GE(oc, 0);
  const auto& v = st.tess.cells[oc].v;  // opposite pairs (0,1), (2,3), (4,5)
  auto def = ref;
  // move vertex 0 to just past the centre: the image is no longer convex
  const Vec<3> centre = 0.5 * (ref[v[0]] + ref[v[1]]);
  def[v[0]] = centre + 0.1 * (ref[v[1]] - centre);
  auto rep = check_admissible<3>(st.tess.cells, ref, def);
  EXPECT_FALSE(rep.admissible);
  bool found = false;
  for (const auto& f : rep.first) found |= f.cell == oc;
  EXPECT_TRUE(found);
}
