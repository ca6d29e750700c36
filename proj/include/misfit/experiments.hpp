#pragma once

// k-sweeps of the transition cost, log-log exponent fits and the crossover between the
// defect-free (rho = 1) and the dislocated (rho = lambda) branches.

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "misfit/errors.hpp"
#include "misfit/lattice.hpp"
#include "misfit/relax.hpp"
#include "misfit/rigidity.hpp"
#include "misfit/seeds.hpp"

namespace misfit {

struct ScalingRow {
  LatticeKind kind = LatticeKind::FCC;
  double rho = 1.0;
  double lambda = 1.0;
  int k = 1;
  double M = 0.0;
  double gamma_hat = 0.0;
  bool converged = false;
  bool failed = false;
  std::string error;  // set when failed; not persisted beyond the "failed" marker

  bool operator==(const ScalingRow& o) const {
    return kind == o.kind && rho == o.rho && lambda == o.lambda && k == o.k && M == o.M && gamma_hat == o.gamma_hat &&
           converged == o.converged && failed == o.failed;
  }
};

struct ScalingTable {
  std::vector<ScalingRow> rows;

  [[nodiscard]] bool partial() const {
    return std::any_of(rows.begin(), rows.end(), [](const ScalingRow& r) { return r.failed; });
  }
  /// Successful rows of one (rho) group, sorted by k.
  [[nodiscard]] std::vector<ScalingRow> group(double rho) const {
    std::vector<ScalingRow> g;
    for (const auto& r : rows)
      if (r.rho == rho && !r.failed) g.push_back(r);
    std::sort(g.begin(), g.end(), [](const auto& a, const auto& b) { return a.k < b.k; });
    return g;
  }
  void sort() {
    std::sort(rows.begin(), rows.end(), [](const ScalingRow& a, const ScalingRow& b) {
      return std::tie(a.kind, a.lambda, b.rho, a.k) < std::tie(b.kind, b.lambda, a.rho, b.k);
    });
  }
  void validate() const {
    std::set<std::tuple<int, double, double, int>> seen;
    for (const auto& r : rows) {
      if (!seen.insert({static_cast<int>(r.kind), r.rho, r.lambda, r.k}).second)
        throw InputError("duplicate k=" + std::to_string(r.k) + " in group rho=" + std::to_string(r.rho));
      if (!r.failed && !(r.gamma_hat >= 0.0)) throw InputError("negative gamma_hat in table");
    }
  }

  bool operator==(const ScalingTable&) const = default;
};

struct SweepOptions {
  MinimizeOptions minimize;
  std::function<std::vector<double>(int)> schedule = default_schedule;
  EnergyParams params;
  std::optional<int> inject_failure_k;  // fault injection: this k fails in every group
};

/// One gamma estimate per (rho, k). A failing cell is recorded and the sweep continues.
/// Rows are sorted by rho (descending) and k.
inline ScalingTable scaling_sweep(LatticeKind kind, double lambda, const std::vector<double>& rho_list,
                                  const std::vector<int>& k_list, const SweepOptions& opt) {
  if (k_list.empty()) throw InputError("k list is empty");
  if (rho_list.empty()) throw InputError("rho list is empty");
  for (std::size_t i = 1; i < k_list.size(); ++i)
    if (k_list[i] <= k_list[i - 1]) throw InputError("k list must be increasing");
  struct Job {
    double rho;
    int k;
  };
  std::vector<Job> jobs;
  for (double rho : rho_list)
    for (int k : k_list) jobs.push_back({rho, k});
  ScalingTable table;
  table.rows.resize(jobs.size());
  MinimizeOptions inner = opt.minimize;
  const unsigned workers = opt.minimize.workers ? opt.minimize.workers : worker_count();
  // cells run in parallel; each inner minimisation then runs its starts serially
  if (workers > 1) inner.workers = 1;
  parallel_for(jobs.size(), workers, [&](std::size_t i) {
    ScalingRow& row = table.rows[i];
    row.kind = kind;
    row.rho = jobs[i].rho;
    row.lambda = lambda;
    row.k = jobs[i].k;
    try {
      if (opt.inject_failure_k && *opt.inject_failure_k == row.k) throw DomainError("injected failure");
      LatticeSpec spec{kind, row.rho, lambda, row.k, 1.0};
      spec.validate();
      const auto sched = opt.schedule(row.k);
      GammaEstimate est = dimension_of(kind) == 3 ? gamma_estimate<3>(spec, inner, sched, Mat<3>::Identity(), opt.params)
                                                  : gamma_estimate<2>(spec, inner, sched, Mat<2>::Identity(), opt.params);
      row.M = est.M;
      row.gamma_hat = est.value;
      row.converged = est.converged;
    } catch (const std::exception& e) {
      row.failed = true;
      row.converged = false;
      row.M = 0.0;
      row.gamma_hat = 0.0;
      row.error = e.what();
    }
  });
  table.sort();
  return table;
}

struct PowerLawFit {
  double exponent = 0.0;
  double log_prefactor = 0.0;
  double r_squared = 0.0;
};

/// Least-squares line through (log k, log gamma_hat).
inline PowerLawFit fit_power_law(const std::vector<ScalingRow>& rows) {
  if (rows.size() < 3) throw InputError("power-law fit needs at least 3 rows");
  std::set<int> ks;
  for (const auto& r : rows) {
    if (r.failed) throw InputError("power-law fit given a failed row");
    if (!(r.gamma_hat > 0.0)) throw InputError("degenerate group: gamma_hat = 0 at k=" + std::to_string(r.k));
    if (!ks.insert(r.k).second) throw InputError("power-law fit: repeated k");
  }
  const double n = static_cast<double>(rows.size());
  double sx = 0, sy = 0;
  for (const auto& r : rows) {
    sx += std::log(r.k);
    sy += std::log(r.gamma_hat);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& r : rows) {
    const double dx = std::log(r.k) - mx, dy = std::log(r.gamma_hat) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  PowerLawFit f;
  f.exponent = sxy / sxx;
  f.log_prefactor = my - f.exponent * mx;
  f.r_squared = syy == 0.0 ? 1.0 : std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
  return f;
}

/// Smallest sampled k from which gamma(lambda, k) < gamma(1, k) holds for every larger
/// sampled k; nullopt when there is none.
inline std::optional<int> crossover(const std::vector<ScalingRow>& defect_free, const std::vector<ScalingRow>& dislocated) {
  std::map<int, double> a, b;
  for (const auto& r : defect_free) a[r.k] = r.gamma_hat;
  for (const auto& r : dislocated) b[r.k] = r.gamma_hat;
  if (a.size() != defect_free.size() || b.size() != dislocated.size()) throw InputError("crossover: repeated k");
  std::vector<int> ka, kb;
  for (auto& [k, v] : a) ka.push_back(k);
  for (auto& [k, v] : b) kb.push_back(k);
  if (ka != kb) throw InputError("crossover: k grids of the two groups differ");
  std::optional<int> star;
  for (auto it = ka.rbegin(); it != ka.rend(); ++it) {
    if (b[*it] < a[*it]) star = *it;
    else break;
  }
  return star;
}

inline std::optional<int> crossover(const ScalingTable& t, double lambda) {
  return crossover(t.group(1.0), t.group(lambda));
}

/// (log k, log gamma_hat) pairs of one group.
inline std::vector<std::pair<double, double>> plot_data(const std::vector<ScalingRow>& rows) {
  std::vector<std::pair<double, double>> out;
  for (const auto& r : rows)
    if (!r.failed && r.gamma_hat > 0.0) out.emplace_back(std::log(r.k), std::log(r.gamma_hat));
  return out;
}

/// Shortest decimal that round-trips, at most 17 significant digits.
inline std::string format_real(double v) {
  if (!std::isfinite(v)) throw InputError("non-finite value in output");
  char buf[32];
  for (int p = 1; p <= 17; ++p) {
    std::snprintf(buf, sizeof buf, "%.*g", p, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline constexpr const char* kScalingCsvHeader = "kind,rho,lambda,k,M,gamma_hat,converged";

inline void write_scaling_csv(std::ostream& os, const ScalingTable& t) {
  os << kScalingCsvHeader << '\n';
  for (const auto& r : t.rows) {
    os << to_string(r.kind) << ',' << format_real(r.rho) << ',' << format_real(r.lambda) << ',' << r.k << ',';
    if (r.failed) os << ",,failed\n";
    else os << format_real(r.M) << ',' << format_real(r.gamma_hat) << ',' << (r.converged ? "true" : "false") << '\n';
  }
}

namespace detail {
inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> f;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      f.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  f.push_back(cur);
  return f;
}

inline double parse_real(const std::string& s, const std::string& what) {
  std::size_t pos = 0;
  double v;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw InputError("malformed number in " + what + ": '" + s + "'");
  }
  if (pos != s.size() || !std::isfinite(v)) throw InputError("malformed number in " + what + ": '" + s + "'");
  return v;
}
}  // namespace detail

inline ScalingTable read_scaling_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || detail::split_csv(line) != detail::split_csv(kScalingCsvHeader))
    throw InputError("scaling CSV: bad header");
  ScalingTable t;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = detail::split_csv(line);
    const std::string where = "scaling CSV line " + std::to_string(lineno);
    if (f.size() != 7) throw InputError(where + ": expected 7 fields");
    ScalingRow r;
    r.kind = parse_kind(f[0]);
    r.rho = detail::parse_real(f[1], where + " rho");
    r.lambda = detail::parse_real(f[2], where + " lambda");
    r.k = static_cast<int>(detail::parse_real(f[3], where + " k"));
    if (f[6] == "failed") {
      r.failed = true;
      r.error = "failed";
    } else {
      r.M = detail::parse_real(f[4], where + " M");
      r.gamma_hat = detail::parse_real(f[5], where + " gamma_hat");
      if (f[6] != "true" && f[6] != "false") throw InputError(where + ": converged must be true, false or failed");
      r.converged = f[6] == "true";
    }
    t.rows.push_back(r);
  }
  t.validate();
  return t;
}

/// Random rotations for the invariance check, from the rotation seed stream.
template <int D>
std::vector<Mat<D>> random_rotations(int n, std::uint64_t seed) {
  std::mt19937_64 rng(derive_seed(seed, SeedStream::Rotations, 0));
  std::vector<Mat<D>> out;
  for (int i = 0; i < n; ++i) {
    if constexpr (D == 3) {
      out.push_back(random_rotation(rng));
    } else {
      std::uniform_real_distribution<double> u(-M_PI, M_PI);
      out.push_back(Eigen::Rotation2Dd(u(rng)).toRotationMatrix());
    }
  }
  return out;
}

}  // namespace misfit
