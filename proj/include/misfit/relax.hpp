#pragma once

// Minimisation of the discrete energy between far-field clamps: the left end follows the
// identity, the right end (lambda/rho) R x + t_R with t_R free. The minimum over the
// slab of half-length M is an upper estimate of the transition cost gamma.

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <thread>
#include <vector>

#include "misfit/energy.hpp"
#include "misfit/errors.hpp"
#include "misfit/lattice.hpp"
#include "misfit/seeds.hpp"
#include "misfit/structure.hpp"

namespace misfit {

/// Exact gradient of the energy with respect to every atom position.
template <int D>
std::vector<Vec<D>> energy_gradient(std::span<const WeightedBond> bonds, const Deformation<D>& def) {
  std::vector<Vec<D>> g(def.size(), Vec<D>::Zero());
  for (const auto& b : bonds) {
    Vec<D> d = def[b.a] - def[b.b];
    const double l = d.norm();
    if (!(l > 0.0)) throw DomainError("gradient singular: bond " + std::to_string(b.a) + "-" + std::to_string(b.b) + " has zero length");
    double c = 0.0;
    for (const auto& t : b.active()) c += 2.0 * t.weight * (l - t.rest);
    Vec<D> f = (c / l) * d;
    g[b.a] += f;
    g[b.b] -= f;
  }
  return g;
}

/// Worker count from MISFIT_WORKERS, else the hardware concurrency.
inline unsigned worker_count() {
  if (const char* s = std::getenv("MISFIT_WORKERS")) {
    int v = std::atoi(s);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs f(i) for i in [0, n) on up to `workers` threads; results are placed by index.
template <class F>
void parallel_for(std::size_t n, unsigned workers, F&& f) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errs(n);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next++) < n;) {
        try {
          f(i);
        } catch (...) {
          errs[i] = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

struct MinimizeOptions {
  double tol_grad = 1e-8;
  int max_iter = 10000;
  int multistart = 4;
  std::uint64_t seed = 1;
  int memory = 12;              // L-BFGS history length
  double perturbation = 0.02;   // multistart noise amplitude, in bond lengths
  unsigned workers = 0;         // 0: worker_count()

  void validate() const {
    if (!(tol_grad > 0.0)) throw InputError("tol_grad must be positive");
    if (max_iter < 1) throw InputError("max_iter must be positive");
    if (multistart < 1) throw InputError("multistart must be positive");
    if (memory < 1) throw InputError("memory must be positive");
    if (!(perturbation >= 0.0)) throw InputError("perturbation must be non-negative");
  }
};

template <int D>
struct ClampSpec {
  double M = 0.0;
  Mat<D> R = Mat<D>::Identity();
};

enum class AtomRole : std::uint8_t { Free, LeftClamp, RightClamp };

/// The clamped minimisation problem on one structure. Variables are the free atom
/// positions followed by the right clamp translation t_R (t_L = 0 fixes the gauge).
template <int D>
class ClampedProblem {
 public:
  ClampedProblem(const Structure<D>& st, const ClampSpec<D>& clamp, const EnergyParams& params = {})
      : st_(&st), clamp_(clamp), mu_(st.spec.lambda / st.spec.rho) {
    if (std::abs(clamp.R.determinant() - 1.0) > 1e-9 || !(clamp.R.transpose() * clamp.R).isIdentity(1e-9))
      throw InputError("clamp rotation must lie in SO(d)");
    ref_ = st.positions();
    bonds_ = compile_bonds<D>(st.spec, st.atoms, st.graph.edges(), params);
    adm_ = AdmissibilityChecker<D>(st.tess.cells, ref_);
    const std::size_t n = ref_.size();
    role_.resize(n);
    var_.assign(n, -1);
    int nv = 0, nl = 0, nr = 0;
    const double tol = 1e-9 * std::max(1.0, clamp.M);
    for (std::size_t i = 0; i < n; ++i) {
      const double x1 = st.xi[i][0];
      if (x1 <= -clamp.M + tol) role_[i] = AtomRole::LeftClamp, ++nl;
      else if (x1 >= clamp.M - tol) role_[i] = AtomRole::RightClamp, ++nr;
      else {
        role_[i] = AtomRole::Free;
        var_[i] = nv++;
      }
    }
    if (nl == 0 || nr == 0) throw InputError("clamp half-length M exceeds the slab: no clamped atoms on one side");
    nfree_ = nv;
    AR_ = mu_ * clamp.R;
  }

  [[nodiscard]] int dimension() const { return D * nfree_ + D; }
  [[nodiscard]] int free_atoms() const { return nfree_; }
  [[nodiscard]] const std::vector<WeightedBond>& bonds() const { return bonds_; }
  [[nodiscard]] const std::vector<Vec<D>>& reference() const { return ref_; }
  [[nodiscard]] const std::vector<AtomRole>& roles() const { return role_; }
  [[nodiscard]] const Structure<D>& structure() const { return *st_; }
  [[nodiscard]] const ClampSpec<D>& clamp() const { return clamp_; }
  [[nodiscard]] double mu() const { return mu_; }

  [[nodiscard]] Vec<D> translation(const Eigen::VectorXd& x) const { return x.template tail<D>(); }

  [[nodiscard]] Deformation<D> expand(const Eigen::VectorXd& x) const {
    Deformation<D> def(ref_.size());
    const Vec<D> t = translation(x);
    for (std::size_t i = 0; i < ref_.size(); ++i) {
      switch (role_[i]) {
        case AtomRole::LeftClamp: def[i] = ref_[i]; break;
        case AtomRole::RightClamp: def[i] = AR_ * ref_[i] + t; break;
        case AtomRole::Free: def[i] = x.template segment<D>(D * var_[i]); break;
      }
    }
    return def;
  }

  /// Variables of a full deformation; t_R is read from the right clamp atoms.
  [[nodiscard]] Eigen::VectorXd compress(const Deformation<D>& def, const Vec<D>& t) const {
    Eigen::VectorXd x(dimension());
    for (std::size_t i = 0; i < ref_.size(); ++i)
      if (var_[i] >= 0) x.template segment<D>(D * var_[i]) = def[i];
    x.template tail<D>() = t;
    return x;
  }

  [[nodiscard]] double value(const Eigen::VectorXd& x) const { return energy<D>(bonds_, expand(x)).total; }

  double value_and_gradient(const Eigen::VectorXd& x, Eigen::VectorXd& g) const {
    const auto def = expand(x);
    const auto ga = energy_gradient<D>(bonds_, def);
    g.setZero(dimension());
    Vec<D> gt = Vec<D>::Zero();
    for (std::size_t i = 0; i < ref_.size(); ++i) {
      if (var_[i] >= 0) g.template segment<D>(D * var_[i]) = ga[i];
      else if (role_[i] == AtomRole::RightClamp) gt += ga[i];
    }
    g.template tail<D>() = gt;
    return energy<D>(bonds_, def).total;
  }

  [[nodiscard]] double min_det(const Eigen::VectorXd& x) const { return adm_.min_det(expand(x)); }
  [[nodiscard]] bool admissible(const Eigen::VectorXd& x) const { return adm_.ok(expand(x)); }

  /// Bent-beam start: scale ramps from 1 to mu over xi_1 in [-ws, ws] and the rotation
  /// from I to R over [-wr, wr]; cross-sections follow the rotated, scaled axis.
  [[nodiscard]] Eigen::VectorXd initial_guess(double ws, double wr) const {
    const auto& V = lattice_basis<D>(st_->spec.kind).generators;
    Vec<D> xc_xi = Vec<D>::Constant(0.5 * st_->spec.k);
    xc_xi[0] = 0.0;
    const Vec<D> xc = V * xc_xi;
    const Vec<D> v1 = V.col(0);
    auto ramp = [](double t, double w) { return w <= 0.0 ? (t >= 0.0 ? 1.0 : 0.0) : std::clamp((t + w) / (2.0 * w), 0.0, 1.0); };
    auto Q = [&](double s) -> Mat<D> {
      if constexpr (D == 3) {
        Eigen::AngleAxisd aa(clamp_.R);
        return Eigen::AngleAxisd(s * aa.angle(), aa.axis()).toRotationMatrix();
      } else {
        double th = std::atan2(clamp_.R(1, 0), clamp_.R(0, 0));
        return Eigen::Rotation2Dd(s * th).toRotationMatrix();
      }
    };
    auto m = [&](double t) { return 1.0 + ramp(t, ws) * (mu_ - 1.0); };
    const double wmax = std::max(ws, wr);
    // axis curve C(t) = xc + int_0^t Q(s(u)) m(u) v1 du, tabulated on a fine grid
    const double h = 1.0 / 128.0;
    const double lo = -wmax - 1.0, hi = wmax + 1.0;
    const int nsteps = static_cast<int>(std::ceil((hi - lo) / h));
    std::vector<Vec<D>> table(nsteps + 1);
    auto tangent = [&](double t) -> Vec<D> { return Q(ramp(t, wr)) * (m(t) * v1); };
    table[0] = xc + lo * v1;  // left of the ramps the map is the identity
    for (int i = 0; i < nsteps; ++i) {
      double a = lo + i * h, b = a + h;
      table[i + 1] = table[i] + 0.5 * h * (tangent(a) + tangent(b));
    }
    auto C = [&](double t) -> Vec<D> {
      if (t <= lo) return xc + t * v1;
      if (t >= hi) return table[nsteps] + (t - hi) * tangent(hi);
      double f = (t - lo) / h;
      int i = std::min(nsteps - 1, static_cast<int>(f));
      double w = f - i;
      return (1.0 - w) * table[i] + w * table[i + 1];
    };
    Deformation<D> def(ref_.size());
    for (std::size_t i = 0; i < ref_.size(); ++i) {
      const double t = st_->xi[i][0];
      Vec<D> w = ref_[i] - xc - t * v1;
      def[i] = C(t) + Q(ramp(t, wr)) * (m(t) * w);
    }
    const Vec<D> tR = C(hi) - AR_ * (xc + hi * v1);
    return compress(def, tR);
  }

  /// Right translation consistent with a deformation at the right clamp.
  [[nodiscard]] std::optional<Vec<D>> translation_of(const Deformation<D>& def) const {
    for (std::size_t i = 0; i < ref_.size(); ++i)
      if (role_[i] == AtomRole::RightClamp) return Vec<D>(def[i] - AR_ * ref_[i]);
    return std::nullopt;
  }

 private:
  const Structure<D>* st_;
  ClampSpec<D> clamp_;
  double mu_;
  Mat<D> AR_;
  std::vector<Vec<D>> ref_;
  std::vector<WeightedBond> bonds_;
  AdmissibilityChecker<D> adm_;
  std::vector<AtomRole> role_;
  std::vector<int> var_;
  int nfree_ = 0;
};

struct DescentResult {
  Eigen::VectorXd x;
  double value = 0.0;
  double grad_norm = 0.0;  // infinity norm
  int iterations = 0;
  bool converged = false;
  bool stalled = false;
};

/// L-BFGS with Armijo backtracking; trial points failing admissibility are halved like
/// failing Armijo steps, so every accepted iterate is admissible and the energy sequence
/// is non-increasing.
template <class Problem>
DescentResult lbfgs_descent(const Problem& P, Eigen::VectorXd x, const MinimizeOptions& opt) {
  if (!P.admissible(x)) throw DomainError("minimize: start is not admissible");
  DescentResult r;
  Eigen::VectorXd g, gn;
  double f = P.value_and_gradient(x, g);
  std::deque<Eigen::VectorXd> S, Y;
  std::deque<double> Rho;
  int it = 0;
  for (; it < opt.max_iter; ++it) {
    const double gnorm = g.lpNorm<Eigen::Infinity>();
    if (gnorm < opt.tol_grad) {
      r.converged = true;
      break;
    }
    // two-loop recursion
    Eigen::VectorXd q = g;
    std::vector<double> alpha(S.size());
    for (int i = static_cast<int>(S.size()) - 1; i >= 0; --i) {
      alpha[i] = Rho[i] * S[i].dot(q);
      q -= alpha[i] * Y[i];
    }
    double gamma = S.empty() ? std::min(1.0, 0.1 / gnorm) : S.back().dot(Y.back()) / Y.back().squaredNorm();
    q *= gamma;
    for (std::size_t i = 0; i < S.size(); ++i) {
      double beta = Rho[i] * Y[i].dot(q);
      q += (alpha[i] - beta) * S[i];
    }
    Eigen::VectorXd p = -q;
    double slope = g.dot(p);
    if (!(slope < 0.0)) {
      S.clear();
      Y.clear();
      Rho.clear();
      p = -std::min(1.0, 0.1 / gnorm) * g;
      slope = g.dot(p);
    }
    double step = 1.0, fn = f;
    Eigen::VectorXd xn;
    bool accepted = false;
    while (step >= 1e-14) {
      xn = x + step * p;
      if (P.admissible(xn)) {
        fn = P.value_and_gradient(xn, gn);
        if (fn <= f + 1e-4 * step * slope) {
          accepted = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (!S.empty()) {  // retry once along steepest descent before giving up
        S.clear();
        Y.clear();
        Rho.clear();
        continue;
      }
      r.stalled = true;
      break;
    }
    Eigen::VectorXd s = xn - x, y = gn - g;
    const double sy = s.dot(y);
    if (sy > 1e-300) {
      S.push_back(std::move(s));
      Y.push_back(std::move(y));
      Rho.push_back(1.0 / sy);
      if (static_cast<int>(S.size()) > opt.memory) {
        S.pop_front();
        Y.pop_front();
        Rho.pop_front();
      }
    }
    x = std::move(xn);
    g = gn;
    f = fn;
  }
  r.x = std::move(x);
  r.value = f;
  r.grad_norm = g.lpNorm<Eigen::Infinity>();
  r.iterations = it;
  return r;
}

template <int D>
struct MinimizeResult {
  Deformation<D> def;
  Vec<D> translation = Vec<D>::Zero();
  EnergyBreakdown energy;
  int iterations = 0;
  double grad_norm = 0.0;
  bool converged = false;
  bool stalled = false;
  bool admissible = false;
  int best_start = 0;
  int starts = 0;
};

/// Admissible start: the bent-beam guess with the scale ramp widened until admissible.
template <int D>
Eigen::VectorXd default_start(const ClampedProblem<D>& P) {
  const double M = P.clamp().M;
  const bool rotated = !P.clamp().R.isIdentity(1e-14);
  for (double ws = 1.0;; ws *= 2.0) {
    const double w = std::min(ws, M);
    const double wr = rotated ? M : w;
    Eigen::VectorXd x = P.initial_guess(w, wr);
    if (P.admissible(x)) return x;
    if (w >= M) break;
  }
  throw DomainError("minimize: no admissible start found");
}

/// Multistart minimisation. Start 0 is `warm` when given (else the default start); the
/// default start and perturbed copies fill the remaining slots. The best value wins; ties
/// go to the lowest start index.
template <int D>
MinimizeResult<D> minimize(const ClampedProblem<D>& P, const MinimizeOptions& opt,
                           const std::optional<Eigen::VectorXd>& warm = std::nullopt, std::uint64_t stream_index = 0) {
  opt.validate();
  std::vector<Eigen::VectorXd> starts;
  if (warm && P.admissible(*warm)) starts.push_back(*warm);
  const Eigen::VectorXd base = default_start(P);
  starts.push_back(base);
  const Eigen::VectorXd centre = starts.front();
  for (int s = static_cast<int>(starts.size()); s < opt.multistart; ++s) {
    std::mt19937_64 rng(derive_seed(opt.seed, SeedStream::Multistart, stream_index * 1000 + s));
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double scale = opt.perturbation * lattice_basis<D>(P.structure().spec.kind).nn_distance;
    Eigen::VectorXd noise(P.dimension());
    for (int i = 0; i < noise.size(); ++i) noise[i] = u(rng) * scale;
    noise.template tail<D>().setZero();
    double amp = 1.0;
    while (amp > 1e-6 && !P.admissible(centre + amp * noise)) amp *= 0.5;
    starts.push_back(centre + amp * noise);
  }
  if (static_cast<int>(starts.size()) > opt.multistart) starts.resize(opt.multistart);
  std::vector<DescentResult> runs(starts.size());
  parallel_for(starts.size(), opt.workers ? opt.workers : worker_count(),
               [&](std::size_t i) { runs[i] = lbfgs_descent(P, starts[i], opt); });
  std::size_t best = 0;
  for (std::size_t i = 1; i < runs.size(); ++i)
    if (runs[i].value < runs[best].value) best = i;
  MinimizeResult<D> out;
  const auto& b = runs[best];
  out.def = P.expand(b.x);
  out.translation = P.translation(b.x);
  out.energy = energy<D>(P.bonds(), out.def);
  out.iterations = b.iterations;
  out.grad_norm = b.grad_norm;
  out.converged = b.converged;
  out.stalled = b.stalled;
  out.admissible = P.admissible(b.x);
  out.best_start = static_cast<int>(best);
  out.starts = static_cast<int>(runs.size());
  if (!out.admissible) throw InternalError("minimize returned an inadmissible iterate");
  return out;
}

struct GammaEstimate {
  double value = 0.0;
  double rho = 1.0;
  double lambda = 1.0;
  int k = 1;
  double M = 0.0;
  int iterations = 0;
  double grad_norm = 0.0;
  bool admissible = true;
  bool converged = false;  // last two schedule values within 1% (or both zero)
  bool stalled = false;
  int multistart_best_of = 1;
  std::vector<double> M_values;
  std::vector<double> values;
};

/// Atom key independent of M: phase, sublattice and integer lattice index.
template <int D>
struct AtomKey {
  int phase;
  int sublattice;
  std::array<int, D> cell;
  auto operator<=>(const AtomKey&) const = default;
};

template <int D>
AtomKey<D> key_of(const Atom<D>& a) {
  return {static_cast<int>(a.phase), a.sublattice, a.cell};
}

/// Extends a minimiser on a shorter slab to a longer one: shared atoms keep their
/// positions, new atoms follow the clamp map of their side.
template <int D>
std::optional<Eigen::VectorXd> extend_solution(const ClampedProblem<D>& P, const Structure<D>& prev_st,
                                               const Deformation<D>& prev_def, const Vec<D>& prev_t) {
  std::map<AtomKey<D>, int> index;
  for (std::size_t i = 0; i < prev_st.atoms.size(); ++i) index[key_of(prev_st.atoms.atoms[i])] = static_cast<int>(i);
  const auto& st = P.structure();
  const Mat<D> AR = P.mu() * P.clamp().R;
  Deformation<D> def(st.atoms.size());
  for (std::size_t i = 0; i < st.atoms.size(); ++i) {
    auto it = index.find(key_of(st.atoms.atoms[i]));
    if (it != index.end()) def[i] = prev_def[it->second];
    else if (st.xi[i][0] < 0.0) def[i] = P.reference()[i];
    else def[i] = AR * P.reference()[i] + prev_t;
  }
  Eigen::VectorXd x = P.compress(def, prev_t);
  if (!P.admissible(x)) return std::nullopt;
  return x;
}

template <int D>
struct GammaRun {
  GammaEstimate estimate;
  Structure<D> structure;       // at the largest M
  MinimizeResult<D> result;     // at the largest M
};

/// gamma estimate over an increasing M schedule, warm-starting each M from the previous
/// minimiser so that the value sequence is non-increasing.
template <int D>
GammaRun<D> gamma_run(const LatticeSpec& spec_in, const MinimizeOptions& opt, const std::vector<double>& schedule,
                      const Mat<D>& R = Mat<D>::Identity(), const EnergyParams& params = {},
                      const StructureOptions& sopt = {}) {
  if (schedule.empty()) throw InputError("M schedule is empty");
  for (std::size_t i = 1; i < schedule.size(); ++i)
    if (!(schedule[i] > schedule[i - 1])) throw InputError("M schedule must be increasing");
  GammaRun<D> run;
  auto& est = run.estimate;
  est.rho = spec_in.rho;
  est.lambda = spec_in.lambda;
  est.k = spec_in.k;
  std::optional<Structure<D>> prev_st;
  MinimizeResult<D> prev;
  for (std::size_t m = 0; m < schedule.size(); ++m) {
    LatticeSpec spec = spec_in;
    spec.M = schedule[m];
    Structure<D> st = build_structure<D>(spec, sopt);
    ClampedProblem<D> P(st, {schedule[m], R}, params);
    std::optional<Eigen::VectorXd> warm;
    if (prev_st) warm = extend_solution<D>(P, *prev_st, prev.def, prev.translation);
    MinimizeResult<D> res = minimize<D>(P, opt, warm, m);
    est.M_values.push_back(schedule[m]);
    est.values.push_back(res.energy.total);
    est.iterations = res.iterations;
    est.grad_norm = res.grad_norm;
    est.admissible = res.admissible;
    est.stalled = res.stalled;
    est.multistart_best_of = res.starts;
    prev = std::move(res);
    prev_st = std::move(st);
  }
  est.M = schedule.back();
  est.value = est.values.back();
  if (est.values.size() >= 2) {
    double a = est.values[est.values.size() - 2], b = est.values.back();
    est.converged = (a == 0.0 && b == 0.0) || std::abs(a - b) <= 0.01 * std::max(std::abs(a), std::abs(b));
  } else {
    est.converged = prev.converged;
  }
  run.structure = std::move(*prev_st);
  run.result = std::move(prev);
  return run;
}

template <int D>
GammaEstimate gamma_estimate(const LatticeSpec& spec, const MinimizeOptions& opt, const std::vector<double>& schedule,
                             const Mat<D>& R = Mat<D>::Identity(), const EnergyParams& params = {}) {
  return gamma_run<D>(spec, opt, schedule, R, params).estimate;
}

/// Limit of gamma(M) = a + b/M through the last two schedule points.
inline double extrapolate_inverse_M(const std::vector<double>& Ms, const std::vector<double>& values) {
  if (Ms.size() != values.size() || Ms.empty()) throw InputError("extrapolation needs matching, nonempty sequences");
  if (Ms.size() == 1) return values.back();
  const std::size_t n = Ms.size();
  const double x0 = 1.0 / Ms[n - 2], x1 = 1.0 / Ms[n - 1];
  const double b = (values[n - 2] - values[n - 1]) / (x0 - x1);
  return values[n - 1] - b * x1;
}

/// (max - min) / min, 0 for a single value.
inline double relative_spread(const std::vector<double>& v) {
  if (v.empty()) throw InputError("spread of an empty list");
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  if (*hi == 0.0) return 0.0;
  if (!(*lo > 0.0)) return std::numeric_limits<double>::infinity();
  return (*hi - *lo) / *lo;
}

template <int D>
struct RotationReport {
  std::vector<Mat<D>> rotations;
  std::vector<GammaEstimate> runs;
  std::vector<double> raw;           // value at the largest M
  std::vector<double> extrapolated;  // a + b/M limit
  double raw_spread = 0.0;
  double extrapolated_spread = 0.0;
};

/// Runs gamma_estimate with right clamp (lambda/rho) R for each R. A rotated clamp pays a
/// bending cost decaying like 1/M, so the spread is reported both raw and extrapolated.
template <int D>
RotationReport<D> rotation_invariance_check(const LatticeSpec& spec, const MinimizeOptions& opt,
                                            const std::vector<double>& schedule, const std::vector<Mat<D>>& rotations,
                                            const EnergyParams& params = {}) {
  if (rotations.empty()) throw InputError("no rotations given");
  RotationReport<D> rep;
  rep.rotations = rotations;
  rep.runs.resize(rotations.size());
  for (std::size_t i = 0; i < rotations.size(); ++i)
    rep.runs[i] = gamma_estimate<D>(spec, opt, schedule, rotations[i], params);
  for (const auto& r : rep.runs) {
    rep.raw.push_back(r.value);
    rep.extrapolated.push_back(extrapolate_inverse_M(r.M_values, r.values));
  }
  rep.raw_spread = relative_spread(rep.raw);
  rep.extrapolated_spread = relative_spread(rep.extrapolated);
  return rep;
}

/// Default clamp schedule for wire thickness k: M = k + 3, 2k + 3, 3k + 3.
inline std::vector<double> default_schedule(int k) {
  if (k < 1) throw InputError("k must be at least 1");
  return {k + 3.0, 2.0 * k + 3.0, 3.0 * k + 3.0};
}

}  // namespace misfit
