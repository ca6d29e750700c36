#pragma once

// Serialization of structures, energies, estimates and tables; file digests and atomic
// writes. Reals are written as the shortest decimal that reads back to the same double.

#include <openssl/evp.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "misfit/energy.hpp"
#include "misfit/errors.hpp"
#include "misfit/experiments.hpp"
#include "misfit/relax.hpp"
#include "misfit/rigidity.hpp"
#include "misfit/structure.hpp"

namespace misfit::io {

using json = nlohmann::ordered_json;

inline std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) throw InternalError("SHA-256 failed");
  std::ostringstream os;
  for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InputError("cannot open " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

/// Writes through a temporary file in the target directory and renames it into place.
inline void write_atomic(const std::filesystem::path& p, std::string_view content) {
  namespace fs = std::filesystem;
  const fs::path dir = p.has_parent_path() ? p.parent_path() : fs::path(".");
  std::error_code ec;
  fs::create_directories(dir, ec);
  const fs::path tmp = dir / ("." + p.filename().string() + ".tmp" + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw InputError("write failed: " + tmp.string());
  }
  fs::rename(tmp, p, ec);
  if (ec) {
    fs::remove(tmp);
    throw InputError("cannot move " + tmp.string() + " to " + p.string() + ": " + ec.message());
  }
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

template <int D>
json vec_json(const Vec<D>& v) {
  json a = json::array();
  for (int i = 0; i < D; ++i) a.push_back(v[i]);
  return a;
}

inline json spec_json(const LatticeSpec& s) {
  return json{{"kind", to_string(s.kind)}, {"rho", s.rho}, {"lambda", s.lambda}, {"k", s.k}, {"M", s.M}};
}

template <int D>
json atoms_json(const Structure<D>& st) {
  json atoms = json::array();
  for (const auto& a : st.atoms.atoms) {
    json c = json::array();
    for (int x : a.cell) c.push_back(x);
    atoms.push_back({{"id", a.id},
                     {"pos", vec_json<D>(a.pos)},
                     {"phase", a.phase == Phase::Left ? "left" : "right"},
                     {"sublattice", a.sublattice},
                     {"cell", c}});
  }
  return json{{"spec", spec_json(st.spec)}, {"count", st.atoms.size()}, {"atoms", atoms}};
}

template <int D>
json bonds_json(const Structure<D>& st) {
  json edges = json::array();
  std::map<std::string, std::size_t> counts;
  for (const auto& b : st.graph.edges()) {
    edges.push_back({{"a", b.a}, {"b", b.b}, {"class", std::string(to_string(b.cls))}});
    ++counts[std::string(to_string(b.cls))];
  }
  json cells = json::array();
  for (const auto& c : st.tess.cells) cells.push_back({{"shape", std::string(to_string(c.shape))}, {"v", c.v}});
  return json{{"spec", spec_json(st.spec)}, {"atoms", st.atoms.size()}, {"counts", counts},
              {"edges", edges},             {"cells", cells}};
}

/// Flat bond list: one `a,b,class` line per edge.
template <int D>
std::string bonds_csv(const Structure<D>& st) {
  std::ostringstream os;
  os << "a,b,class\n";
  for (const auto& b : st.graph.edges()) os << b.a << ',' << b.b << ',' << to_string(b.cls) << '\n';
  return os.str();
}

inline json breakdown_json(const EnergyBreakdown& e) {
  json by = json::object();
  for (int c = 0; c < kEnergyClasses; ++c) by[std::string(to_string(static_cast<EnergyClass>(c)))] = e.by_class[c];
  return json{{"total", e.total}, {"by_class", by}};
}

inline json estimate_json(const GammaEstimate& g) {
  return json{{"value", g.value},
              {"rho", g.rho},
              {"lambda", g.lambda},
              {"k", g.k},
              {"M", g.M},
              {"iterations", g.iterations},
              {"grad_norm", g.grad_norm},
              {"admissible", g.admissible},
              {"converged", g.converged},
              {"stalled", g.stalled},
              {"multistart_best_of", g.multistart_best_of},
              {"M_values", g.M_values},
              {"values", g.values}};
}

inline json fit_json(const ConstantFit& f) {
  return json{{"constant", f.constant},
              {"max_ratio", f.max_ratio},
              {"samples", f.samples},
              {"refinements", f.refinements},
              {"histogram", f.histogram}};
}

inline json validation_json(const ValidationResult& v) {
  return json{{"samples", v.samples}, {"violations", v.violations}, {"max_ratio", v.max_ratio}};
}

inline json row_json(const ScalingRow& r) {
  json j{{"kind", to_string(r.kind)}, {"rho", r.rho}, {"lambda", r.lambda}, {"k", r.k}};
  if (r.failed) {
    j["M"] = nullptr;
    j["gamma_hat"] = nullptr;
    j["converged"] = "failed";
    j["error"] = r.error;
  } else {
    j["M"] = r.M;
    j["gamma_hat"] = r.gamma_hat;
    j["converged"] = r.converged;
  }
  return j;
}

inline json table_json(const ScalingTable& t) {
  json rows = json::array();
  for (const auto& r : t.rows) rows.push_back(row_json(r));
  return json{{"rows", rows}};
}

inline ScalingTable table_from_json(const json& j) {
  ScalingTable t;
  try {
    for (const auto& r : j.at("rows")) {
      ScalingRow row;
      row.kind = parse_kind(r.at("kind").get<std::string>());
      row.rho = r.at("rho").get<double>();
      row.lambda = r.at("lambda").get<double>();
      row.k = r.at("k").get<int>();
      if (r.at("converged").is_string()) {
        if (r.at("converged").get<std::string>() != "failed") throw InputError("table row: bad converged marker");
        row.failed = true;
        row.error = r.value("error", std::string("failed"));
      } else {
        row.M = r.at("M").get<double>();
        row.gamma_hat = r.at("gamma_hat").get<double>();
        row.converged = r.at("converged").get<bool>();
      }
      t.rows.push_back(row);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("scaling table JSON: ") + e.what());
  }
  t.validate();
  return t;
}

inline std::string table_csv(const ScalingTable& t) {
  std::ostringstream os;
  write_scaling_csv(os, t);
  return os.str();
}

inline const char* element_symbol(Phase p) { return p == Phase::Left ? "L" : "R"; }

/// XYZ with one line per atom: tag L for the left phase, R for the right, coordinates
/// (z = 0 in 2D) and the atom id.
template <int D>
std::string xyz(const AtomSet<D>& atoms, const std::vector<Vec<D>>& pos, const std::string& comment) {
  if (pos.size() != atoms.size()) throw InputError("xyz: positions do not match atoms");
  std::ostringstream os;
  os << pos.size() << '\n' << comment << '\n';
  for (std::size_t i = 0; i < pos.size(); ++i) {
    const auto& a = atoms.atoms[i];
    os << element_symbol(a.phase);
    for (int c = 0; c < 3; ++c) os << ' ' << format_real(c < D ? pos[i][c] : 0.0);
    os << ' ' << i << '\n';
  }
  return os.str();
}

/// Positions from an XYZ file written by xyz(); the id column fixes the order.
template <int D>
std::vector<Vec<D>> read_xyz(const std::string& text) {
  std::istringstream is(text);
  std::size_t n = 0;
  std::string line;
  if (!(is >> n)) throw InputError("xyz: missing atom count");
  std::getline(is, line);
  std::getline(is, line);
  std::vector<Vec<D>> pos(n);
  std::vector<bool> seen(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::getline(is, line)) throw InputError("xyz: truncated at atom " + std::to_string(i));
    std::istringstream ls(line);
    std::string sym;
    double c[3];
    long id = static_cast<long>(i);
    if (!(ls >> sym >> c[0] >> c[1] >> c[2])) throw InputError("xyz: malformed line " + std::to_string(i + 3));
    if (!(ls >> id)) id = static_cast<long>(i);
    if (id < 0 || id >= static_cast<long>(n) || seen[id]) throw InputError("xyz: bad atom id on line " + std::to_string(i + 3));
    seen[id] = true;
    for (int d = 0; d < D; ++d) pos[id][d] = c[d];
  }
  return pos;
}

}  // namespace misfit::io
