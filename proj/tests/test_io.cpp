#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "misfit/config.hpp"

using namespace misfit;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("misfit_io_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  [[nodiscard]] std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
  static inline int counter_ = 0;
};

std::string error_of(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

// Random config documents drawn from the valid value ranges, with random keys omitted.
io::json random_config(std::mt19937_64& rng) {
  auto coin = [&] { return std::bernoulli_distribution(0.5)(rng); };
  auto pick = [&](const std::vector<io::json>& v) { return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)]; };
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  io::json j = io::json::object();
  if (coin()) j["command"] = pick({"generate", "bonds", "energy", "verify-rigidity", "gamma", "scaling"});
  if (coin()) j["kind"] = pick({"fcc", "hcp", "bcc", "dc", "honeycomb"});
  if (coin()) j["rho"] = unit(rng);
  if (coin()) j["lambda"] = unit(rng);
  if (coin()) j["k"] = std::uniform_int_distribution<int>(1, 9)(rng);
  if (coin()) {
    if (coin()) j["M"] = 1.0 + 10 * unit(rng);
    else j["M_schedule"] = {3.5, 5, 7.25};
  }
  if (coin()) j["seed"] = std::uniform_int_distribution<long long>(0, 1LL << 40)(rng);
  if (coin()) j["tol_grad"] = 1e-9 * (1 + unit(rng));
  if (coin()) j["max_iter"] = std::uniform_int_distribution<int>(1, 50000)(rng);
  if (coin()) j["multistart"] = std::uniform_int_distribution<int>(1, 8)(rng);
  if (coin()) j["c1"] = 2 * unit(rng);
  if (coin()) j["c2"] = 2 * unit(rng);
  if (coin()) j["samples"] = 1000;
  if (coin()) j["rotations"] = 3;
  if (coin()) j["rho_list"] = {1.0, 0.7};
  if (coin()) j["k_list"] = {2, 4, 6};
  if (coin()) j["inject_failure_k"] = 4;
  if (coin()) j["out"] = "dir/result.json";
  if (coin()) j["xyz"] = "cloud.xyz";
  return j;
}

}  // namespace

TEST(Config, ShortDocumentGetsDefaults) {
  auto c = parse_config_text(R"({"kind":"fcc","rho":0.8,"lambda":0.8,"k":3})");
  EXPECT_EQ(c.kind, LatticeKind::FCC);
  EXPECT_EQ(c.rho, 0.8);
  EXPECT_EQ(c.k, 3);
  EXPECT_EQ(c.M_schedule, default_schedule(3));
  EXPECT_EQ(c.command, "gamma");
  EXPECT_EQ(c.out, "gamma.json");
  EXPECT_EQ(c.manifest, "gamma.json.manifest.json");
}

TEST(Config, ErrorsNameTheKey) {
  EXPECT_NE(error_of(R"({"kind":"fcc","rho":1.5,"lambda":0.8,"k":3})").find("rho out of (0,1]"), std::string::npos);
  EXPECT_NE(error_of(R"({"kind":"fcc","lambda":0})").find("lambda out of (0,1]"), std::string::npos);
  EXPECT_NE(error_of(R"({"rh0":0.8})").find("unknown key 'rh0'"), std::string::npos);
  EXPECT_NE(error_of(R"({"rho":"0.8"})").find("config.rho: expected a number"), std::string::npos);
  EXPECT_NE(error_of(R"({"k":0})").find("k out of"), std::string::npos);
  EXPECT_NE(error_of(R"({"k":2.5})").find("config.k: expected an integer"), std::string::npos);
  EXPECT_NE(error_of(R"({"M":4,"M_schedule":[4,5]})").find("either M or M_schedule"), std::string::npos);
  EXPECT_NE(error_of(R"({"M_schedule":[5,4]})").find("increasing"), std::string::npos);
  EXPECT_NE(error_of(R"({"kind":"fcc",)").find("malformed document"), std::string::npos);
  EXPECT_NE(error_of(R"({"kind":"quasicrystal"})"), "");
  EXPECT_NE(error_of(R"({"command":"dance"})").find("unknown command"), std::string::npos);
}

TEST(Config, SampleDocumentsParse) {
  for (const auto& e : fs::directory_iterator(MISFIT_CONFIG_DIR)) {
    if (e.path().extension() != ".json") continue;
    EXPECT_NO_THROW(parse_config_text(io::read_file(e.path()))) << e.path();
  }
}

TEST(Config, NormalizedFormIsAFixedPoint) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 400; ++i) {
    const io::json doc = random_config(rng);
    const io::json norm = config_json(parse_config(doc));
    EXPECT_EQ(config_json(parse_config(norm)), norm) << doc.dump();
    for (const auto& [key, v] : doc.items()) {
      if (key == "M") EXPECT_EQ(norm["M_schedule"], io::json::array({v})) << doc.dump();
      else EXPECT_EQ(norm[key], v) << key << " in " << doc.dump();
    }
  }
}

TEST(Digest, KnownVectors) {
  EXPECT_EQ(io::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(io::sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Files, AtomicWriteReplacesContent) {
  TempDir dir;
  const auto p = dir / "sub/file.txt";
  io::write_atomic(p, "first");
  io::write_atomic(p, "second");
  EXPECT_EQ(io::read_file(p), "second");
  for (const auto& e : fs::directory_iterator(fs::path(p).parent_path()))
    EXPECT_EQ(e.path().filename(), "file.txt");
  EXPECT_THROW(io::read_file(dir / "missing"), InputError);
}

TEST(Xyz, RoundTripsPositionsExactly) {
  auto st = build_structure<3>({LatticeKind::HCP, 0.9, 0.8, 1, 3.0});
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n(0, 0.1);
  auto pos = st.positions();
  for (auto& p : pos) p += Vec<3>(n(rng), n(rng), n(rng));
  const auto text = io::xyz<3>(st.atoms, pos, "test");
  EXPECT_EQ(io::read_xyz<3>(text), pos);
  EXPECT_EQ(text.substr(text.find('\n', text.find('\n') + 1) + 1, 2), "L ");
  EXPECT_NE(text.find("\nR "), std::string::npos);
  EXPECT_THROW(io::read_xyz<3>("3\nc\nL 0 0 0 0\n"), InputError);
}

TEST(TableJson, RoundTrips) {
  ScalingTable t;
  for (int k : {1, 2, 3}) {
    ScalingRow r;
    r.rho = 0.8;
    r.lambda = 0.8;
    r.k = k;
    r.M = 3.0 * k + 3;
    r.gamma_hat = 0.1 * k + 1.0 / 3;
    r.converged = k != 2;
    r.failed = k == 3;
    if (r.failed) r.M = r.gamma_hat = 0, r.converged = false;
    t.rows.push_back(r);
  }
  EXPECT_EQ(io::table_from_json(io::json::parse(io::dump(io::table_json(t)))), t);
}

TEST(Run, GenerateWritesAtomsAndManifest) {
  TempDir dir;
  io::json doc{{"command", "generate"}, {"kind", "fcc"}, {"rho", 0.8}, {"lambda", 0.8}, {"k", 1}, {"M", 3},
               {"out", dir / "atoms.json"}};
  const auto man = run(parse_config(doc));
  ASSERT_EQ(man.outputs.size(), 1u);
  EXPECT_EQ(man.outputs[0].first, dir / "atoms.json");
  EXPECT_EQ(man.outputs[0].second, io::sha256_hex(io::read_file(dir / "atoms.json")));
  const auto atoms = io::json::parse(io::read_file(dir / "atoms.json"));
  EXPECT_FALSE(atoms.empty());
  const auto m = io::json::parse(io::read_file(dir / "atoms.json.manifest.json"));
  EXPECT_EQ(m["status"], "ok");
  EXPECT_EQ(m["version"], kVersion);
  EXPECT_EQ(m["config"], config_json(parse_config(doc)));
  EXPECT_EQ(m["outputs"][0]["sha256"], man.outputs[0].second);
}

TEST(Run, GammaIsReproducible) {
  TempDir dir;
  io::json doc{{"command", "gamma"}, {"kind", "honeycomb"}, {"rho", 0.8},          {"lambda", 0.8},
               {"k", 2},             {"M_schedule", {5, 7}}, {"multistart", 3},      {"seed", 5},
               {"out", dir / "g.json"}, {"xyz", dir / "g.xyz"}};
  const auto a = run(parse_config(doc));
  const auto b = run(parse_config(doc));
  ASSERT_EQ(a.outputs.size(), 2u);
  EXPECT_EQ(a.outputs, b.outputs);
}

TEST(Run, PartialSweepFlagsTheFailedRow) {
  TempDir dir;
  io::json doc{{"command", "scaling"}, {"kind", "honeycomb"}, {"lambda", 0.8}, {"k_list", {2, 3}},
               {"inject_failure_k", 3}, {"multistart", 1},    {"out", dir / "s.csv"}};
  const auto man = run(parse_config(doc));
  EXPECT_EQ(man.status, "partial");
  const auto csv = io::read_file(dir / "s.csv");
  EXPECT_NE(csv.find("honeycomb,1,0.8,3,,,failed"), std::string::npos);
  EXPECT_NE(csv.find("honeycomb,0.8,0.8,3,,,failed"), std::string::npos);
  EXPECT_EQ(csv.find("honeycomb,1,0.8,2,,,failed"), std::string::npos);
  EXPECT_EQ(io::json::parse(io::read_file(dir / "s.csv.manifest.json"))["status"], "partial");
}

TEST(Run, EnergyOfTheIdentityOnMatchedPhasesIsZero) {
  TempDir dir;
  io::json doc{{"command", "energy"}, {"kind", "bcc"}, {"rho", 1}, {"lambda", 1}, {"k", 1}, {"M", 3},
               {"out", dir / "e.json"}};
  run(parse_config(doc));
  const auto j = io::json::parse(io::read_file(dir / "e.json"));
  EXPECT_EQ(j["admissible"], true);
  EXPECT_NEAR(j["energy"]["total"].get<double>(), 0.0, 1e-12);
}

TEST(Run, BondsExportEdgesCellsAndCsv) {
  TempDir dir;
  io::json doc{{"command", "bonds"}, {"kind", "fcc"}, {"rho", 0.9}, {"lambda", 0.8}, {"k", 1}, {"M", 3},
               {"out", dir / "b.json"}};
  const auto man = run(parse_config(doc));
  ASSERT_EQ(man.outputs.size(), 2u);
  const auto j = io::json::parse(io::read_file(dir / "b.json"));
  const auto st = build_structure<3>({LatticeKind::FCC, 0.9, 0.8, 1, 3.0});
  ASSERT_EQ(j["edges"].size(), st.graph.edges().size());
  EXPECT_EQ(j["edges"][0]["a"], st.graph.edges()[0].a);
  EXPECT_EQ(j["cells"].size(), st.tess.cells.size());
  const auto csv = io::read_file(dir / "b.csv");
  EXPECT_EQ(csv.rfind("a,b,class\n", 0), 0u);
  EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), st.graph.edges().size() + 1);
}
