#pragma once

// Run configuration documents and the dispatcher behind every subcommand. A config is
// validated in full before any computation; the normalized form echoes every default.

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "misfit/io.hpp"

namespace misfit {

inline constexpr const char* kVersion = "0.1.0";

struct RunConfig {
  std::string command = "gamma";
  LatticeKind kind = LatticeKind::FCC;
  double rho = 1.0;
  double lambda = 0.8;
  int k = 2;
  std::vector<double> M_schedule;  // default_schedule(k) when absent
  std::uint64_t seed = 1;
  double tol_grad = 1e-8;
  int max_iter = 10000;
  int multistart = 4;
  double c1 = 1.0;
  double c2 = 1.0;
  int samples = 100000;       // tetrahedral rigidity fit and validation
  int octa_samples = 1000;    // octahedral rigidity fit and validation
  int rotations = 0;          // gamma: extra random right-clamp rotations
  std::vector<double> rho_list;  // scaling: default {1, lambda}
  std::vector<int> k_list{1, 2, 3, 4};
  std::optional<int> inject_failure_k;
  std::string deformation;    // energy: XYZ file of deformed positions; identity if empty
  std::string out;            // primary output; per-command default
  std::string xyz;            // optional XYZ output (generate, gamma)
  std::string manifest;       // default: out + ".manifest.json"

  [[nodiscard]] LatticeSpec spec() const { return {kind, rho, lambda, k, M_schedule.back()}; }

  [[nodiscard]] MinimizeOptions minimize_options() const {
    MinimizeOptions o;
    o.tol_grad = tol_grad;
    o.max_iter = max_iter;
    o.multistart = multistart;
    o.seed = seed;
    return o;
  }
};

inline const std::set<std::string>& known_commands() {
  static const std::set<std::string> s{"generate", "bonds", "energy", "verify-rigidity", "gamma", "scaling"};
  return s;
}

inline std::string default_output(const std::string& command) {
  if (command == "generate") return "atoms.json";
  if (command == "bonds") return "bonds.json";
  if (command == "energy") return "energy.json";
  if (command == "verify-rigidity") return "rigidity.json";
  if (command == "gamma") return "gamma.json";
  return "scaling.csv";
}

namespace detail {

inline double get_real(const io::json& j, const std::string& key) {
  const auto& v = j.at(key);
  if (!v.is_number()) throw InputError("config." + key + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw InputError("config." + key + ": not finite");
  return x;
}

inline long long get_int(const io::json& j, const std::string& key) {
  const auto& v = j.at(key);
  if (v.is_number_integer()) return v.get<long long>();
  if (v.is_number_float()) {
    const double x = v.get<double>();
    if (std::isfinite(x) && x == std::floor(x) && std::abs(x) < 9e15) return static_cast<long long>(x);
  }
  throw InputError("config." + key + ": expected an integer");
}

inline std::string get_string(const io::json& j, const std::string& key) {
  const auto& v = j.at(key);
  if (!v.is_string()) throw InputError("config." + key + ": expected a string");
  return v.get<std::string>();
}

template <class T, class Get>
std::vector<T> get_list(const io::json& j, const std::string& key, Get&& get) {
  const auto& v = j.at(key);
  if (!v.is_array()) throw InputError("config." + key + ": expected a list");
  std::vector<T> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    io::json wrap{{key + "[" + std::to_string(i) + "]", v[i]}};
    out.push_back(static_cast<T>(get(wrap, key + "[" + std::to_string(i) + "]")));
  }
  return out;
}

inline void check_unit_interval(double x, const std::string& key) {
  if (!(x > 0.0 && x <= 1.0)) throw InputError(key + " out of (0,1]");
}

}  // namespace detail

/// Typed, range-checked config with defaults applied.
inline RunConfig parse_config(const io::json& j) {
  using namespace detail;
  if (!j.is_object()) throw InputError("config: expected an object");
  static const std::set<std::string> keys{"command",  "kind",       "rho",       "lambda",   "k",
                                          "M",        "M_schedule", "seed",      "tol_grad", "max_iter",
                                          "multistart", "c1",       "c2",        "samples",  "octa_samples",
                                          "rotations", "rho_list",  "k_list",    "inject_failure_k",
                                          "deformation", "out",     "xyz",       "manifest"};
  for (const auto& [key, v] : j.items())
    if (!keys.count(key)) throw InputError("config: unknown key '" + key + "'");
  RunConfig c;
  if (j.contains("command")) c.command = get_string(j, "command");
  if (!known_commands().count(c.command)) throw InputError("config.command: unknown command '" + c.command + "'");
  if (j.contains("kind")) c.kind = parse_kind(get_string(j, "kind"));
  if (j.contains("rho")) c.rho = get_real(j, "rho");
  if (j.contains("lambda")) c.lambda = get_real(j, "lambda");
  check_unit_interval(c.rho, "rho");
  check_unit_interval(c.lambda, "lambda");
  if (j.contains("k")) {
    auto k = get_int(j, "k");
    if (k < 1 || k > 1000) throw InputError("k out of [1,1000]");
    c.k = static_cast<int>(k);
  }
  if (j.contains("M") && j.contains("M_schedule")) throw InputError("config: give either M or M_schedule, not both");
  if (j.contains("M")) c.M_schedule = {get_real(j, "M")};
  if (j.contains("M_schedule")) c.M_schedule = get_list<double>(j, "M_schedule", get_real);
  if (c.M_schedule.empty()) c.M_schedule = default_schedule(c.k);
  for (std::size_t i = 0; i < c.M_schedule.size(); ++i) {
    if (!(c.M_schedule[i] >= 1.0)) throw InputError("M out of [1,inf)");
    if (i > 0 && !(c.M_schedule[i] > c.M_schedule[i - 1])) throw InputError("M_schedule must be increasing");
  }
  if (j.contains("seed")) {
    auto s = get_int(j, "seed");
    if (s < 0) throw InputError("seed must be non-negative");
    c.seed = static_cast<std::uint64_t>(s);
  }
  if (j.contains("tol_grad")) c.tol_grad = get_real(j, "tol_grad");
  if (!(c.tol_grad > 0.0)) throw InputError("tol_grad must be positive");
  auto positive = [&](const char* key, int& field) {
    if (!j.contains(key)) return;
    auto v = get_int(j, key);
    if (v < 1 || v > 100000000) throw InputError(std::string(key) + " out of [1,1e8]");
    field = static_cast<int>(v);
  };
  positive("max_iter", c.max_iter);
  positive("multistart", c.multistart);
  positive("samples", c.samples);
  positive("octa_samples", c.octa_samples);
  if (j.contains("rotations")) {
    auto v = get_int(j, "rotations");
    if (v < 0 || v > 100) throw InputError("rotations out of [0,100]");
    c.rotations = static_cast<int>(v);
  }
  if (j.contains("c1")) c.c1 = get_real(j, "c1");
  if (j.contains("c2")) c.c2 = get_real(j, "c2");
  if (!(c.c1 > 0.0) || !(c.c2 > 0.0)) throw InputError("c1, c2 must be positive");
  if (j.contains("rho_list")) c.rho_list = get_list<double>(j, "rho_list", get_real);
  if (c.rho_list.empty()) c.rho_list = c.lambda == 1.0 ? std::vector<double>{1.0} : std::vector<double>{1.0, c.lambda};
  for (double r : c.rho_list) check_unit_interval(r, "rho_list entry");
  if (std::set<double>(c.rho_list.begin(), c.rho_list.end()).size() != c.rho_list.size())
    throw InputError("rho_list has repeated entries");
  if (j.contains("k_list")) c.k_list = get_list<int>(j, "k_list", get_int);
  if (c.k_list.empty()) throw InputError("k_list is empty");
  for (std::size_t i = 0; i < c.k_list.size(); ++i) {
    if (c.k_list[i] < 1) throw InputError("k_list entry out of [1,inf)");
    if (i > 0 && c.k_list[i] <= c.k_list[i - 1]) throw InputError("k_list must be increasing");
  }
  if (j.contains("inject_failure_k") && !j.at("inject_failure_k").is_null())
    c.inject_failure_k = static_cast<int>(get_int(j, "inject_failure_k"));
  if (j.contains("deformation")) c.deformation = get_string(j, "deformation");
  if (j.contains("out")) c.out = get_string(j, "out");
  if (c.out.empty()) c.out = default_output(c.command);
  if (j.contains("xyz")) c.xyz = get_string(j, "xyz");
  if (j.contains("manifest")) c.manifest = get_string(j, "manifest");
  if (c.manifest.empty()) c.manifest = c.out + ".manifest.json";
  LatticeSpec probe = c.spec();
  probe.validate();
  return c;
}

inline RunConfig parse_config_text(std::string_view text) {
  io::json j;
  try {
    j = io::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("config: malformed document: ") + e.what());
  }
  return parse_config(j);
}

/// Normalized document: every key, defaults included, in a fixed order.
inline io::json config_json(const RunConfig& c) {
  io::json j{{"command", c.command},
             {"kind", to_string(c.kind)},
             {"rho", c.rho},
             {"lambda", c.lambda},
             {"k", c.k},
             {"M_schedule", c.M_schedule},
             {"seed", c.seed},
             {"tol_grad", c.tol_grad},
             {"max_iter", c.max_iter},
             {"multistart", c.multistart},
             {"c1", c.c1},
             {"c2", c.c2},
             {"samples", c.samples},
             {"octa_samples", c.octa_samples},
             {"rotations", c.rotations},
             {"rho_list", c.rho_list},
             {"k_list", c.k_list}};
  j["inject_failure_k"] = c.inject_failure_k ? io::json(*c.inject_failure_k) : io::json(nullptr);
  j["deformation"] = c.deformation;
  j["out"] = c.out;
  j["xyz"] = c.xyz;
  j["manifest"] = c.manifest;
  return j;
}

struct RunManifest {
  io::json config;
  std::string version = kVersion;
  std::uint64_t seed = 0;
  double wall_time = 0.0;
  std::string status = "ok";  // ok or partial
  std::vector<std::pair<std::string, std::string>> outputs;  // path, sha256

  [[nodiscard]] io::json to_json() const {
    io::json outs = io::json::array();
    for (const auto& [p, d] : outputs) outs.push_back({{"path", p}, {"sha256", d}});
    return io::json{{"version", version}, {"seed", seed},     {"status", status},
                    {"wall_time", wall_time}, {"config", config}, {"outputs", outs}};
  }
};

namespace detail {

template <class F>
decltype(auto) with_dimension(LatticeKind kind, F&& f) {
  if (dimension_of(kind) == 3) return f(std::integral_constant<int, 3>{});
  return f(std::integral_constant<int, 2>{});
}

class OutputSet {
 public:
  void write(const std::string& path, const std::string& content) {
    io::write_atomic(path, content);
    files_.emplace_back(path, io::sha256_hex(content));
    std::clog << "wrote " << path << '\n';
  }
  [[nodiscard]] const auto& files() const { return files_; }

 private:
  std::vector<std::pair<std::string, std::string>> files_;
};

/// Companion output path: `path` with extension `ext`, or `path + ext` when that would
/// name `path` itself.
inline std::string with_extension(const std::string& path, const std::string& ext) {
  std::filesystem::path p(path);
  p.replace_extension(ext);
  return p.string() == path ? path + ext : p.string();
}

template <int D>
io::json rotation_json(const RotationReport<D>& rep) {
  io::json runs = io::json::array();
  for (std::size_t i = 0; i < rep.runs.size(); ++i) {
    io::json R = io::json::array();
    for (int r = 0; r < D; ++r) {
      io::json row = io::json::array();
      for (int c = 0; c < D; ++c) row.push_back(rep.rotations[i](r, c));
      R.push_back(row);
    }
    runs.push_back({{"R", R}, {"estimate", io::estimate_json(rep.runs[i])}, {"extrapolated", rep.extrapolated[i]}});
  }
  return io::json{{"raw_spread", rep.raw_spread}, {"extrapolated_spread", rep.extrapolated_spread}, {"runs", runs}};
}

}  // namespace detail

/// Executes a validated config; writes the declared outputs and the manifest.
inline RunManifest run(const RunConfig& c) {
  using detail::with_dimension;
  const auto t0 = std::chrono::steady_clock::now();
  RunManifest man;
  man.config = config_json(c);
  man.seed = c.seed;
  detail::OutputSet outs;
  const EnergyParams params{c.c1, c.c2};

  if (c.command == "verify-rigidity") {
    std::clog << "fitting tetrahedral constant on " << c.samples << " samples\n";
    auto ft = fit_tetra_constant(c.samples, derive_seed(c.seed, SeedStream::TetraFit, 0));
    auto vt = validate_tetra_constant(ft.constant, c.samples, derive_seed(c.seed, SeedStream::TetraValidate, 0));
    std::clog << "fitting octahedral constant on " << c.octa_samples << " samples\n";
    auto fo = fit_octa_constant(c.octa_samples, derive_seed(c.seed, SeedStream::OctaFit, 0));
    auto vo = validate_octa_constant(fo.constant, c.octa_samples, derive_seed(c.seed, SeedStream::OctaValidate, 0));
    io::json j{{"C_tet", ft.constant},
               {"C_oct", fo.constant},
               {"violation_count", vt.violations + vo.violations},
               {"tetra", {{"fit", io::fit_json(ft)}, {"validation", io::validation_json(vt)}}},
               {"octa", {{"fit", io::fit_json(fo)}, {"validation", io::validation_json(vo)}}},
               {"isotropic", {{"tetra_ratio", tetra_ratio(1.1 * Mat<3>::Identity())}}}};
    outs.write(c.out, io::dump(j));
  } else if (c.command == "scaling") {
    SweepOptions so;
    so.minimize = c.minimize_options();
    so.params = params;
    so.inject_failure_k = c.inject_failure_k;
    std::clog << "scaling sweep over " << c.rho_list.size() * c.k_list.size() << " cells\n";
    auto table = scaling_sweep(c.kind, c.lambda, c.rho_list, c.k_list, so);
    outs.write(c.out, io::table_csv(table));
    io::json j = io::table_json(table);
    io::json fits = io::json::array();
    for (double rho : c.rho_list) {
      auto g = table.group(rho);
      io::json entry{{"rho", rho}};
      try {
        auto f = fit_power_law(g);
        entry["exponent"] = f.exponent;
        entry["log_prefactor"] = f.log_prefactor;
        entry["r_squared"] = f.r_squared;
      } catch (const InputError& e) {
        entry["error"] = e.what();
      }
      io::json plot = io::json::array();
      for (auto [x, y] : plot_data(g)) plot.push_back({x, y});
      entry["plot"] = plot;
      fits.push_back(entry);
    }
    j["fits"] = fits;
    if (std::find(c.rho_list.begin(), c.rho_list.end(), 1.0) != c.rho_list.end() && c.lambda != 1.0 &&
        std::find(c.rho_list.begin(), c.rho_list.end(), c.lambda) != c.rho_list.end()) {
      try {
        auto ks = crossover(table, c.lambda);
        j["k_star"] = ks ? io::json(*ks) : io::json(nullptr);
      } catch (const InputError& e) {
        j["k_star"] = nullptr;
        j["crossover_error"] = e.what();
      }
    }
    outs.write(detail::with_extension(c.out, ".json"), io::dump(j));
    if (table.partial()) {
      man.status = "partial";
      for (const auto& r : table.rows)
        if (r.failed) std::clog << "failed: rho=" << r.rho << " k=" << r.k << ": " << r.error << '\n';
    }
  } else {
    with_dimension(c.kind, [&](auto dim) {
      constexpr int D = decltype(dim)::value;
      const LatticeSpec spec = c.spec();
      if (c.command == "gamma") {
        std::clog << "gamma estimate, " << c.M_schedule.size() << " clamp lengths\n";
        auto gr = gamma_run<D>(spec, c.minimize_options(), c.M_schedule, Mat<D>::Identity(), params);
        io::json j = io::estimate_json(gr.estimate);
        j["energy"] = io::breakdown_json(gr.result.energy);
        j["translation"] = io::vec_json<D>(gr.result.translation);
        if (c.rotations > 0) {
          auto Rs = random_rotations<D>(c.rotations, c.seed);
          Rs.insert(Rs.begin(), Mat<D>::Identity());
          j["rotation_check"] =
              detail::rotation_json<D>(rotation_invariance_check<D>(spec, c.minimize_options(), c.M_schedule, Rs, params));
        }
        outs.write(c.out, io::dump(j));
        if (!c.xyz.empty())
          outs.write(c.xyz, io::xyz<D>(gr.structure.atoms, gr.result.def, "relaxed M=" + format_real(gr.estimate.M)));
        return;
      }
      std::clog << "building structure\n";
      auto st = build_structure<D>(spec);
      if (c.command == "generate") {
        outs.write(c.out, io::dump(io::atoms_json<D>(st)));
        if (!c.xyz.empty()) outs.write(c.xyz, io::xyz<D>(st.atoms, st.positions(), "reference"));
      } else if (c.command == "bonds") {
        outs.write(c.out, io::dump(io::bonds_json<D>(st)));
        outs.write(detail::with_extension(c.out, ".csv"), io::bonds_csv<D>(st));
      } else if (c.command == "energy") {
        auto def = c.deformation.empty() ? st.positions() : io::read_xyz<D>(io::read_file(c.deformation));
        if (def.size() != st.atoms.size())
          throw InputError("deformation has " + std::to_string(def.size()) + " atoms, structure has " +
                           std::to_string(st.atoms.size()));
        auto wb = compile_bonds<D>(spec, st.atoms, st.graph.edges(), params);
        auto e = energy<D>(wb, def);
        auto adm = check_admissible<D>(st.tess.cells, st.positions(), def);
        io::json j{{"spec", io::spec_json(spec)},
                   {"deformation", c.deformation.empty() ? "identity" : c.deformation},
                   {"energy", io::breakdown_json(e)},
                   {"bonds", wb.size()},
                   {"admissible", adm.admissible},
                   {"violations", adm.violations}};
        outs.write(c.out, io::dump(j));
      }
    });
  }
  man.outputs = outs.files();
  man.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  io::write_atomic(c.manifest, io::dump(man.to_json()));
  std::clog << "wrote " << c.manifest << '\n';
  return man;
}

}  // namespace misfit
