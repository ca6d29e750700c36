// Acceptance run: one PASS/FAIL line per criterion on standard output, details on
// standard error. Criteria can be selected by number on the command line.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "misfit/config.hpp"

using namespace misfit;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

// ---------------------------------------------------------------------------------
// 1. coordination

template <int D>
std::string coordination_failures(LatticeKind kind, int nn, int nnn) {
  const int k = 5;
  const double M = 3;
  auto st = build_structure<D>({kind, 1.0, 1.0, k, M});
  int interior = 0, bad = 0;
  for (int i = 0; i < static_cast<int>(st.atoms.size()); ++i) {
    bool inside = std::abs(st.xi[i][0]) <= M - 2;
    for (int d = 1; d < D; ++d) inside = inside && st.xi[i][d] >= 2 && st.xi[i][d] <= k - 2;
    if (!inside) continue;
    ++interior;
    if (static_cast<int>(st.graph.neighbours(i, BondClass::NN).size()) != nn ||
        static_cast<int>(st.graph.neighbours(i, BondClass::NNN).size()) != nnn)
      ++bad;
  }
  const std::string name(to_string(kind));
  if (interior == 0) return name + ": no interior atoms; ";
  if (bad) return name + ": " + std::to_string(bad) + "/" + std::to_string(interior) + " interior atoms off; ";
  return "";
}

Outcome coordination() {
  std::string f = coordination_failures<3>(LatticeKind::FCC, 12, 0) + coordination_failures<3>(LatticeKind::HCP, 12, 0) +
                  coordination_failures<3>(LatticeKind::BCC, 14, 0) + coordination_failures<3>(LatticeKind::DC, 4, 12) +
                  coordination_failures<2>(LatticeKind::Honeycomb2D, 3, 6);
  if (!f.empty()) return {false, f};
  return {true, "FCC 12, HCP 12, BCC 14, DC 4+12, honeycomb 3+6"};
}

// ---------------------------------------------------------------------------------
// 2. bulk cell shapes

std::pair<std::vector<Vec<3>>, std::vector<DelaunayCell>> bulk_cells(LatticeKind kind, int half) {
  std::array<AxisRange, 3> box;
  box.fill(AxisRange{-double(half), double(half)});
  auto pts = generate_bulk<3>(kind, box).positions();
  const auto lb = lattice_basis<3>(kind);
  SpatialGrid<3> grid(pts, lb.nn_distance);
  const double trusted = (half - 1.5) * lb.nn_distance;
  DelaunayOptions opt;
  opt.scale = lb.nn_distance;
  auto cells =
      delaunay_pretriangulation<3>(grid, [&](const Vec<3>& c, double r) { return c.norm() + r < trusted; }, opt);
  return {std::move(pts), std::move(cells)};
}

Outcome cell_shapes() {
  std::string detail;
  bool ok = true;
  for (auto kind : {LatticeKind::FCC, LatticeKind::HCP}) {
    auto [pts, cells] = bulk_cells(kind, 4);
    int tets = 0, octs = 0, bad = 0;
    for (const auto& c : cells) {
      if (c.ids.size() != 4 && c.ids.size() != 6) {
        ++bad;
        continue;
      }
      (c.ids.size() == 4 ? tets : octs)++;
      auto edges = cell_edges<3>(pts, Cell{CellShape::RawPolytope, c.ids});
      if (edges.size() != (c.ids.size() == 4 ? 6u : 12u)) ++bad;
      for (auto e : edges)
        if (std::abs((pts[e[0]] - pts[e[1]]).norm() - 1.0) > 1e-9) ++bad;
    }
    ok = ok && bad == 0 && tets > 0 && octs > 0;
    detail += std::string(to_string(kind)) + ": " + std::to_string(tets) + " tetrahedra, " + std::to_string(octs) + " octahedra, " +
              std::to_string(bad) + " off; ";
  }
  auto [pts, cells] = bulk_cells(LatticeKind::BCC, 4);
  const double s6 = std::sqrt(6.0) / 2, s2 = std::sqrt(2.0);
  int bad = 0;
  for (const auto& c : cells) {
    int shortE = 0, longE = 0;
    if (c.ids.size() == 4)
      for (auto e : cell_edges<3>(pts, Cell{CellShape::Simplex, c.ids})) {
        const double l = (pts[e[0]] - pts[e[1]]).norm();
        shortE += std::abs(l - s6) < 1e-9;
        longE += std::abs(l - s2) < 1e-9;
      }
    if (shortE != 4 || longE != 2) ++bad;
  }
  ok = ok && bad == 0 && !cells.empty();
  detail += "bcc: " + std::to_string(cells.size()) + " tetrahedra, " + std::to_string(bad) + " off";
  return {ok, detail};
}

// ---------------------------------------------------------------------------------
// 3. rigidity constants

Outcome rigidity() {
  const std::uint64_t seed = 7;
  auto ft = fit_tetra_constant(100000, derive_seed(seed, SeedStream::TetraFit, 0));
  auto vt = validate_tetra_constant(ft.constant, 100000, derive_seed(seed, SeedStream::TetraValidate, 0));
  auto fo = fit_octa_constant(1000, derive_seed(seed, SeedStream::OctaFit, 0));
  auto vo = validate_octa_constant(fo.constant, 1000, derive_seed(seed, SeedStream::OctaValidate, 0));
  double iso_err = 0;
  for (double t : {1e-3, 0.05, 0.2}) {
    iso_err = std::max(iso_err, std::abs(tetra_gap((1 + t) * Mat<3>::Identity()).ratio() - 0.5));
    std::array<Vec<3>, 6> img;
    for (int i = 0; i < 6; ++i) img[i] = (1 + t) * reference_octahedron()[i];
    for (const auto& g : octa_gap(img))
      iso_err = std::max({iso_err, std::abs(g.lhs - 3 * t * t) / (t * t), std::abs(g.rhs - 12 * t * t) / (t * t)});
  }
  const bool ok = vt.violations == 0 && vo.violations == 0 && iso_err < 1e-9;
  return {ok, "C_tet " + fmt(ft.constant) + " (" + std::to_string(vt.violations) + " violations on 1e5), C_oct " +
                  fmt(fo.constant) + " (" + std::to_string(vo.violations) + " violations on 1e3), isotropic error " +
                  fmt(iso_err, 2)};
}

// ---------------------------------------------------------------------------------
// 4. convexity criterion

Outcome convexity() {
  auto r = check_convexity_equivalence(1000, derive_seed(7, SeedStream::Convexity, 0));
  const bool ok = r.discrepancies == 0 && r.convex > 0 && r.convex < r.samples;
  return {ok, std::to_string(r.discrepancies) + " discrepancies on " + std::to_string(r.samples) + " (" +
                  std::to_string(r.convex) + " convex)"};
}

// ---------------------------------------------------------------------------------
// 5. octahedron diagonal

Outcome octa_formula() {
  double worst = 0;
  for (int j = 0; j <= 20; ++j) {
    const double alpha = std::numbers::pi / 3 + j * std::numbers::pi / 60;
    worst = std::max(worst, std::abs(octa_diagonal(alpha).l3 - (3.0 - 1.0 / std::pow(std::cos(alpha / 2), 2))));
  }
  const double at60 = std::abs(octa_diagonal(std::numbers::pi / 3).l3 - 5.0 / 3.0);
  return {worst < 1e-9 && at60 < 1e-12, "max deviation " + fmt(worst, 2) + ", |l3(pi/3) - 5/3| = " + fmt(at60, 2)};
}

// ---------------------------------------------------------------------------------
// 6. gradient

Outcome gradient() {
  auto st = build_structure<3>({LatticeKind::FCC, 0.8, 0.9, 2, 4.0});
  auto bonds = compile_bonds<3>(st.spec, st.atoms, st.graph.edges(), {});
  const auto ref = st.positions();
  std::vector<std::vector<WeightedBond>> incident(ref.size());
  for (const auto& b : bonds) {
    incident[b.a].push_back(b);
    incident[b.b].push_back(b);
  }
  std::mt19937_64 rng(derive_seed(1, SeedStream::Multistart, 77));
  std::normal_distribution<double> n(0.0, 1.0);
  double worst = 0;
  int sampled = 0, deformations = 0;
  for (int trial = 0; deformations < 5 && trial < 50; ++trial) {
    Mat<3> A = Mat<3>::Identity();
    for (int i = 0; i < 9; ++i) A(i / 3, i % 3) += 0.05 * n(rng);
    Deformation<3> def(ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) def[i] = A * ref[i] + 0.03 * Vec<3>(n(rng), n(rng), n(rng));
    if (!check_admissible<3>(st.tess.cells, ref, def).admissible) continue;
    ++deformations;
    const auto g = energy_gradient<3>(bonds, def);
    std::uniform_int_distribution<std::size_t> pick(0, ref.size() - 1);
    for (int s = 0; s < 100; ++s) {
      const std::size_t i = pick(rng);
      const int c = s % 3;
      const double h = 1e-6;
      auto local = [&](double dx) {
        Deformation<3> d = def;
        d[i][c] += dx;
        return energy<3>(incident[i], d).total;
      };
      const double fd = (local(h) - local(-h)) / (2 * h);
      worst = std::max(worst, std::abs(g[i][c] - fd) / std::max(std::abs(g[i][c]), 1e-6));
      ++sampled;
    }
  }
  return {deformations == 5 && worst < 1e-6, std::to_string(sampled) + " coordinates on " +
                                                 std::to_string(deformations) + " deformations, max relative error " +
                                                 fmt(worst, 2)};
}

// ---------------------------------------------------------------------------------
// 7, 8. scaling and crossover

struct Sweeps {
  std::optional<ScalingTable> fcc, honeycomb;
};

MinimizeOptions sweep_minimizer() {
  MinimizeOptions o;
  o.multistart = 1;
  return o;
}

ScalingTable run_sweep(LatticeKind kind, const std::vector<int>& ks) {
  SweepOptions so;
  so.minimize = sweep_minimizer();
  const auto t0 = std::chrono::steady_clock::now();
  auto t = scaling_sweep(kind, 0.8, {1.0, 0.8}, ks, so);
  std::cerr << "  " << to_string(kind) << " sweep k " << ks.front() << ".." << ks.back() << ": "
            << fmt(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()) << " s\n";
  for (const auto& r : t.rows)
    std::cerr << "    rho=" << r.rho << " k=" << r.k << " M=" << r.M << " gamma=" << format_real(r.gamma_hat)
              << (r.failed ? " FAILED " + r.error : "") << '\n';
  return t;
}

std::string check_band(const ScalingTable& t, double rho, double lo, double hi, bool& ok) {
  try {
    auto f = fit_power_law(t.group(rho));
    const bool in = f.exponent >= lo && f.exponent <= hi && f.r_squared >= 0.95;
    ok = ok && in;
    return "rho=" + fmt(rho, 2) + " exponent " + fmt(f.exponent) + " in [" + fmt(lo, 2) + "," + fmt(hi, 2) + "]? " +
           (in ? "yes" : "no") + " (r2 " + fmt(f.r_squared) + ")";
  } catch (const InputError& e) {
    ok = false;
    return "rho=" + fmt(rho, 2) + " fit failed: " + e.what();
  }
}

Outcome scaling(Sweeps& s) {
  const auto t0 = std::chrono::steady_clock::now();
  if (!s.fcc) s.fcc = run_sweep(LatticeKind::FCC, {1, 2, 3, 4});
  if (!s.honeycomb) s.honeycomb = run_sweep(LatticeKind::Honeycomb2D, {2, 3, 4, 5, 6, 7, 8});
  const double minutes = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / 60;
  bool ok = !s.fcc->partial() && !s.honeycomb->partial();
  std::string d = "fcc " + check_band(*s.fcc, 0.8, 1.6, 2.4, ok) + ", " + check_band(*s.fcc, 1.0, 2.6, 3.4, ok);
  // the wire cross-section has dimension d-1, so the 2D exponents sit one below the 3D ones
  d += "; honeycomb " + check_band(*s.honeycomb, 0.8, 0.6, 1.4, ok) + ", " + check_band(*s.honeycomb, 1.0, 1.6, 2.4, ok);
  d += "; " + fmt(minutes, 3) + " min";
  return {ok && minutes <= 15.0, d};
}

Outcome crossover_exists(Sweeps& s) {
  if (!s.fcc) s.fcc = run_sweep(LatticeKind::FCC, {1, 2, 3, 4});
  auto ks = crossover(*s.fcc, 0.8);
  std::string d;
  if (!ks) {
    auto more = run_sweep(LatticeKind::FCC, {5, 6, 7, 8});
    ScalingTable all = *s.fcc;
    all.rows.insert(all.rows.end(), more.rows.begin(), more.rows.end());
    all.sort();
    ks = crossover(all, 0.8);
    std::ostringstream ratios;
    for (int k = 1; k <= 8; ++k) {
      double a = 0, b = 0;
      for (const auto& r : all.rows)
        if (r.k == k && !r.failed) (r.rho == 1.0 ? a : b) = r.gamma_hat;
      if (a > 0) ratios << (k > 1 ? " " : "") << fmt(b / a, 3);
    }
    d = "fcc k 1..8, ratio gamma(lambda)/gamma(1): " + ratios.str();
  } else {
    d = "fcc k 1..4";
  }
  d += ", k_star " + (ks ? std::to_string(*ks) : std::string("none"));
  if (s.honeycomb) {
    auto kh = crossover(*s.honeycomb, 0.8);
    d += "; honeycomb k_star " + (kh ? std::to_string(*kh) : std::string("none"));
  }
  return {ks.has_value(), d};
}

// ---------------------------------------------------------------------------------
// 9. rotations

Outcome rotations() {
  MinimizeOptions o;
  o.multistart = 1;
  const std::vector<double> schedule{6, 9, 12, 18, 24};
  auto Rs = random_rotations<3>(3, 1);
  auto rep = rotation_invariance_check<3>({LatticeKind::FCC, 1.0, 0.8, 2, 0.0}, o, schedule, Rs);
  std::string vals;
  for (std::size_t i = 0; i < rep.raw.size(); ++i)
    vals += (i ? ", " : "") + fmt(rep.raw[i]) + " -> " + fmt(rep.extrapolated[i]);
  return {rep.extrapolated_spread < 0.05, "M -> inf spread " + fmt(100 * rep.extrapolated_spread, 3) + "% (at M=24: " +
                                              fmt(100 * rep.raw_spread, 3) + "%); " + vals};
}

// ---------------------------------------------------------------------------------
// 10. degenerate cases

template <int D>
double max_matched_value(LatticeKind kind, int k) {
  MinimizeOptions o;
  o.multistart = 1;
  auto est = gamma_estimate<D>({kind, 1.0, 1.0, k, 0.0}, o, default_schedule(k));
  double m = 0;
  for (double v : est.values) m = std::max(m, std::abs(v));
  return m;
}

// Sum over bonds and both endpoints x of (|y_a - y_b| - rest(x))^2 / 2, rest 1 on the left
// phase and lambda on the right.
double interface_sum(const Structure<3>& st, const Deformation<3>& def) {
  long double s = 0;
  for (const auto& b : st.graph.edges()) {
    const double l = (def[b.a] - def[b.b]).norm();
    for (int x : {b.a, b.b}) {
      const double rest = st.atoms.atoms[x].phase == Phase::Left ? 1.0 : st.spec.lambda;
      s += 0.5L * (l - rest) * (l - rest);
    }
  }
  return static_cast<double>(s);
}

Outcome degenerate() {
  double zero = 0;
  zero = std::max(zero, max_matched_value<3>(LatticeKind::FCC, 2));
  zero = std::max(zero, max_matched_value<3>(LatticeKind::HCP, 2));
  zero = std::max(zero, max_matched_value<3>(LatticeKind::BCC, 2));
  zero = std::max(zero, max_matched_value<3>(LatticeKind::DC, 1));
  zero = std::max(zero, max_matched_value<2>(LatticeKind::Honeycomb2D, 2));
  bool ok = zero < 1e-10;
  std::string d = "rho=lambda=1 max |gamma(M)| " + fmt(zero, 2);
  for (auto kind : {LatticeKind::FCC, LatticeKind::HCP}) {
    const LatticeSpec spec{kind, 0.8, 0.8, 2, 5.0};
    auto st = build_structure<3>(spec);
    ClampedProblem<3> P(st, {5.0});
    const auto id = st.positions();
    const double e = P.value(P.compress(id, Vec<3>::Zero()));
    const double oracle = interface_sum(st, id);
    MinimizeOptions o;
    o.multistart = 1;
    const double g = gamma_estimate<3>(spec, o, {5.0}).value;
    const bool match = std::abs(e - oracle) <= 1e-12 * std::max(1.0, oracle);
    ok = ok && match && g <= e;
    d += "; " + std::string(to_string(kind)) + " identity " + format_real(e) + " vs sum " + format_real(oracle) + ", relaxed " +
         fmt(g);
  }
  return {ok, d};
}

// ---------------------------------------------------------------------------------
// 11. reproducibility

Outcome reproducibility() {
  const fs::path dir = fs::temp_directory_path() / ("misfit_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::string cli = MISFIT_CLI_PATH;
  const std::vector<std::pair<std::string, std::string>> runs{
      {"generate", "--kind dc --rho 0.9 --lambda 0.8 --k 2 --M 3"},
      {"bonds", "--kind bcc --rho 0.8 --lambda 0.8 --k 2 --M 3"},
      {"energy", "--kind hcp --rho 0.9 --lambda 0.8 --k 1 --M 3"},
      {"verify-rigidity", "--samples 20000 --octa-samples 200 --seed 3"},
      {"gamma", "--kind fcc --rho 0.8 --lambda 0.8 --k 1 --M 4,5 --multistart 2 --seed 4"},
      {"scaling", "--kind honeycomb --lambda 0.8 --k 2:4 --multistart 1"},
  };
  int identical = 0;
  std::string bad;
  for (const auto& [cmd, args] : runs) {
    std::vector<io::json> outputs;
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path out = dir / (cmd + std::to_string(rep) + (cmd == "scaling" ? ".csv" : ".json"));
      const std::string line = cli + " " + cmd + " " + args + " --out " + out.string() + " 2>/dev/null";
      if (std::system(line.c_str()) != 0) {
        bad += cmd + " exited nonzero; ";
        break;
      }
      auto man = io::json::parse(io::read_file(out.string() + ".manifest.json"));
      io::json digests = io::json::array();
      for (const auto& o : man["outputs"]) digests.push_back(o["sha256"]);
      outputs.push_back(digests);
    }
    if (outputs.size() == 2 && outputs[0] == outputs[1] && !outputs[0].empty()) ++identical;
    else if (outputs.size() == 2) bad += cmd + " differs; ";
  }
  std::error_code ec;
  fs::remove_all(dir, ec);
  return {identical == static_cast<int>(runs.size()),
          std::to_string(identical) + "/" + std::to_string(runs.size()) + " subcommands byte-identical" +
              (bad.empty() ? "" : "; " + bad)};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  Sweeps sweeps;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"coordination numbers", coordination},
      {"bulk cell shapes", cell_shapes},
      {"rigidity constants", rigidity},
      {"octahedron convexity criterion", convexity},
      {"octahedron diagonal formula", octa_formula},
      {"gradient exactness", gradient},
      {"scaling exponents", [&] { return scaling(sweeps); }},
      {"crossover existence", [&] { return crossover_exists(sweeps); }},
      {"rotation independence", rotations},
      {"degenerate correctness", degenerate},
      {"reproducibility", reproducibility},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    std::cerr << "criterion " << id << ": " << criteria[i].first << '\n';
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << id << ". " << criteria[i].first << ": " << o.detail << " ["
              << fmt(secs, 3) << " s]" << std::endl;
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
