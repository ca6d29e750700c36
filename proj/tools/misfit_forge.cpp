// misfit-forge: command line front end. Every subcommand builds a config document from
// its flags and goes through the same validation and dispatch as `run <config>`.
//
// Exit status: 0 success, 1 invalid input, 2 computation error, 3 partial scaling sweep.

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>

#include "misfit/config.hpp"

namespace {

using misfit::io::json;

struct Flag {
  const char* name;  // config key
  const char* flag;  // command line spelling
  const char* help;
  enum Type { Real, Int, String, RealList, IntList } type;
};

const std::vector<Flag> kFlags{
    {"kind", "--kind", "lattice kind: fcc, hcp, bcc, dc, honeycomb", Flag::String},
    {"rho", "--rho", "reference spacing of the right phase, in (0,1]", Flag::Real},
    {"lambda", "--lambda", "lattice mismatch, in (0,1]", Flag::Real},
    {"k", "--k", "wire thickness in lattice cells", Flag::Int},
    {"M_schedule", "--M", "clamp half-lengths, comma separated and increasing", Flag::RealList},
    {"seed", "--seed", "root seed", Flag::Int},
    {"tol_grad", "--tol-grad", "gradient tolerance (infinity norm)", Flag::Real},
    {"max_iter", "--max-iter", "iteration cap per descent", Flag::Int},
    {"multistart", "--multistart", "starts per minimisation", Flag::Int},
    {"c1", "--c1", "next-to-nearest strength, sublattice 1", Flag::Real},
    {"c2", "--c2", "next-to-nearest strength, sublattice 2", Flag::Real},
    {"samples", "--samples", "tetrahedral rigidity samples", Flag::Int},
    {"octa_samples", "--octa-samples", "octahedral rigidity samples", Flag::Int},
    {"rotations", "--rotations", "random clamp rotations to compare against R = I", Flag::Int},
    {"k_list", "--k-list", "wire thicknesses, comma list or a:b range", Flag::IntList},
    {"inject_failure_k", "--inject-failure-k", "make every sweep cell with this k fail", Flag::Int},
    {"deformation", "--deformation", "XYZ file of deformed positions", Flag::String},
    {"out", "--out", "primary output file", Flag::String},
    {"xyz", "--xyz", "XYZ output file", Flag::String},
    {"manifest", "--manifest", "manifest file", Flag::String},
};

const std::map<std::string, std::vector<std::string>> kCommandFlags{
    {"generate", {"kind", "rho", "lambda", "k", "M_schedule", "seed", "out", "xyz", "manifest"}},
    {"bonds", {"kind", "rho", "lambda", "k", "M_schedule", "seed", "out", "manifest"}},
    {"energy", {"kind", "rho", "lambda", "k", "M_schedule", "seed", "c1", "c2", "deformation", "out", "manifest"}},
    {"verify-rigidity", {"seed", "samples", "octa_samples", "out", "manifest"}},
    {"gamma",
     {"kind", "rho", "lambda", "k", "M_schedule", "seed", "tol_grad", "max_iter", "multistart", "c1", "c2", "rotations",
      "out", "xyz", "manifest"}},
    {"scaling",
     {"kind", "lambda", "seed", "tol_grad", "max_iter", "multistart", "c1", "c2", "k_list", "inject_failure_k", "out",
      "manifest"}},
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

json number(const std::string& key, const std::string& s, bool integer) {
  std::size_t pos = 0;
  try {
    if (integer) {
      long long v = std::stoll(s, &pos);
      if (pos == s.size()) return v;
    } else {
      double v = std::stod(s, &pos);
      if (pos == s.size()) return v;
    }
  } catch (const std::exception&) {
  }
  throw misfit::InputError("--" + key + ": malformed number '" + s + "'");
}

json to_value(const Flag& f, const std::string& s) {
  switch (f.type) {
    case Flag::String: return s;
    case Flag::Real: return number(f.name, s, false);
    case Flag::Int: return number(f.name, s, true);
    case Flag::RealList: {
      json a = json::array();
      for (const auto& p : split(s, ',')) a.push_back(number(f.name, p, false));
      return a;
    }
    case Flag::IntList: {
      json a = json::array();
      auto range = split(s, ':');
      if (range.size() == 2) {
        long long lo = number(f.name, range[0], true), hi = number(f.name, range[1], true);
        if (hi < lo || hi - lo > 10000) throw misfit::InputError(std::string("--") + f.name + ": bad range '" + s + "'");
        for (long long k = lo; k <= hi; ++k) a.push_back(k);
      } else {
        for (const auto& p : split(s, ',')) a.push_back(number(f.name, p, true));
      }
      return a;
    }
  }
  return nullptr;
}

void report_error(const char* type, const std::exception& e, bool as_json) {
  std::cerr << "error: " << e.what() << '\n';
  if (as_json) std::cout << json{{"error", {{"type", type}, {"message", e.what()}}}}.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"misfit-forge: biphase lattice nanowires, rigidity checks and transition costs"};
  app.require_subcommand(1);
  app.fallthrough();
  bool error_json = false;
  app.add_flag("--error-json", error_json, "print errors as JSON on standard output");

  std::map<std::string, std::map<std::string, std::string>> values;
  std::map<std::string, std::string> rho_lists;
  for (const auto& [cmd, names] : kCommandFlags) {
    auto* sub = app.add_subcommand(cmd);
    for (const auto& n : names) {
      const auto it = std::find_if(kFlags.begin(), kFlags.end(), [&](const Flag& f) { return n == f.name; });
      std::string flag = it->flag;
      if (cmd == "verify-rigidity" && n == "out") flag += ",--report";
      sub->add_option(flag, values[cmd][n], it->help);
    }
    if (cmd == "scaling") {
      sub->add_option("--rho", rho_lists[cmd], "reference spacings, comma separated");
      sub->add_option("--k", values[cmd]["k_list"], "wire thicknesses, comma list or a:b range");
    }
  }
  std::string config_path;
  auto* run = app.add_subcommand("run", "execute a config document");
  run->add_option("config", config_path, "config file (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    misfit::RunConfig cfg;
    if (run->parsed()) {
      cfg = misfit::parse_config_text(misfit::io::read_file(config_path));
    } else {
      const auto* sub = app.get_subcommands().front();
      const std::string cmd = sub->get_name();
      json doc{{"command", cmd}};
      for (const auto& [key, s] : values[cmd]) {
        if (s.empty()) continue;
        const auto it = std::find_if(kFlags.begin(), kFlags.end(), [&](const Flag& f) { return key == f.name; });
        doc[key] = to_value(*it, s);
      }
      if (!rho_lists[cmd].empty()) doc["rho_list"] = to_value({"rho_list", "--rho", "", Flag::RealList}, rho_lists[cmd]);
      cfg = misfit::parse_config(doc);
    }
    const auto man = misfit::run(cfg);
    if (man.status == "partial") {
      std::cerr << "partial: some sweep cells failed\n";
      return 3;
    }
    return 0;
  } catch (const misfit::InputError& e) {
    report_error("input", e, error_json);
    return 1;
  } catch (const misfit::GeometryError& e) {
    report_error("geometry", e, error_json);
  } catch (const misfit::DomainError& e) {
    report_error("domain", e, error_json);
  } catch (const misfit::InternalError& e) {
    report_error("internal", e, error_json);
  } catch (const std::exception& e) {
    report_error("runtime", e, error_json);
  }
  return 2;
}
