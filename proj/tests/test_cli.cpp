#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "photoncond.hpp"

using namespace photoncond;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"({
  "model": {"kind": "two_level", "N": 10, "gap": 1.0, "dipole": [0, 0, 0.2]},
  "gauge": {"preset": "dipole"},
  "sweep": {"parameter": "dipole", "start": 0.1, "stop": 0.3, "steps": 5}
})";

std::vector<std::string> issues_of(const std::string& text) {
  try {
    validate_config(text);
  } catch (const ConfigError& e) {
    return e.issues();
  }
  return {};
}

bool mentions(const std::vector<std::string>& issues, const std::string& path) {
  for (const auto& s : issues)
    if (s.find(path) != std::string::npos) return true;
  return false;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("photoncond_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path / name, std::ios::binary) << text;
    return path / name;
  }
};

int cli(const std::string& args) {
  const std::string cmd = std::string(PHOTONCOND_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

} // namespace

TEST(ValidateConfig, MinimalDipoleConfig) {
  const SweepConfig c = validate_config(kMinimal);
  EXPECT_EQ(c.model.kind, "two_level");
  EXPECT_EQ(c.model.N, 10);
  ASSERT_EQ(c.gauges.size(), 1u);
  EXPECT_EQ(c.gauges[0].preset, GaugePreset::Dipole);
  EXPECT_EQ(c.sweep.steps, 5);
  EXPECT_FALSE(c.oracle.enabled);
}

TEST(ValidateConfig, AlphaOutOfRange) {
  auto j = nlohmann::json::parse(kMinimal);
  j["gauge"] = {{"preset", "alpha"}, {"alpha", 1.5}};
  EXPECT_TRUE(mentions(issues_of(j.dump()), "gauge.alpha"));
}

TEST(ValidateConfig, ZeroSteps) {
  auto j = nlohmann::json::parse(kMinimal);
  j["sweep"]["steps"] = 0;
  EXPECT_TRUE(mentions(issues_of(j.dump()), "sweep.steps"));
}

TEST(ValidateConfig, ReportsEveryViolation) {
  auto j = nlohmann::json::parse(kMinimal);
  j["sweep"]["steps"] = 0;
  j["model"]["gap"] = -1.0;
  j["gauge"] = {{"preset", "alpha"}, {"alpha", -0.2}};
  j["bogus"] = 1;
  const auto is = issues_of(j.dump());
  EXPECT_TRUE(mentions(is, "sweep.steps"));
  EXPECT_TRUE(mentions(is, "model.gap"));
  EXPECT_TRUE(mentions(is, "gauge.alpha"));
  EXPECT_TRUE(mentions(is, "bogus"));
}

TEST(ValidateConfig, ParseError) {
  const auto is = issues_of("{\"model\": ");
  ASSERT_EQ(is.size(), 1u);
  EXPECT_NE(is[0].find("parse"), std::string::npos);
}

TEST(ValidateConfig, UnknownSweepParameter) {
  auto j = nlohmann::json::parse(kMinimal);
  j["sweep"]["parameter"] = "hopping";
  EXPECT_TRUE(mentions(issues_of(j.dump()), "sweep.parameter"));
}

TEST(ValidateConfig, RingRejectsLongWavelengthPresets) {
  const char* text = R"({"model": {"kind": "ring_lattice", "sites": 6}, "gauge": {"preset": "dipole"},
                         "mode": {"q_list": [1]}, "sweep": {"parameter": "charge", "start": 1, "stop": 2, "steps": 2}})";
  EXPECT_TRUE(mentions(issues_of(text), "gauge.preset"));
}

TEST(Cli, ExitCodes) {
  TempDir t;
  const auto good = t.write("good.json", kMinimal);
  const auto bad = t.write("bad.json", R"({"model": {"kind": "two_level"}, "gauge": {"preset": "dipole"},
                                           "sweep": {"parameter": "dipole", "start": 0, "stop": 1, "steps": 0}})");
  const auto broken = t.write("broken.json", "{ not json");
  EXPECT_EQ(cli("sweep --config " + good.string() + " --out " + (t.path / "o").string()), 0);
  EXPECT_EQ(cli("check --config " + good.string()), 0);
  EXPECT_EQ(cli("sweep --config " + bad.string() + " --out " + (t.path / "o2").string()), 2);
  EXPECT_EQ(cli("sweep --config " + broken.string() + " --out " + (t.path / "o3").string()), 2);
  EXPECT_EQ(cli("sweep --config " + (t.path / "missing.json").string()), 2);
  EXPECT_EQ(cli("sweep"), 2);
  EXPECT_EQ(cli("frobnicate"), 2);
}

TEST(Cli, RuntimeFailureExitsOne) {
  // The oracle refuses a Hilbert space beyond its dimension limit.
  TempDir t;
  const auto cfg = t.write("big.json", R"({
    "model": {"kind": "two_level", "N": 150, "gap": 1.0, "dipole": [0, 0, 0.05]},
    "gauge": {"preset": "dipole"},
    "sweep": {"parameter": "dipole", "start": 0.01, "stop": 0.02, "steps": 2},
    "oracle": {"enabled": true, "cutoff": 200, "max_cutoff": 200, "N_list": [150]}
  })");
  EXPECT_EQ(cli("sweep --config " + cfg.string() + " --out " + (t.path / "o").string()), 1);
}

TEST(Cli, OutputsAndSchema) {
  TempDir t;
  const auto cfg = t.write("c.json", kMinimal);
  ASSERT_EQ(cli("sweep --config " + cfg.string() + " --out " + (t.path / "o").string()), 0);
  std::istringstream csv(slurp(t.path / "o" / "criterion.csv"));
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header, kCriterionHeader);
  int rows = 0;
  for (std::string line; std::getline(csv, line);) {
    ++rows;
    EXPECT_EQ(line.rfind("1,", 0), 0u) << line;
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), std::count(header.begin(), header.end(), ','));
  }
  EXPECT_EQ(rows, 5 * 2);
  const auto s = nlohmann::json::parse(slurp(t.path / "o" / "summary.json"));
  for (const char* k : {"resolved_config", "thresholds", "invariant_results", "timings"}) EXPECT_TRUE(s.contains(k)) << k;
  EXPECT_FALSE(fs::exists(t.path / "o" / "oracle.csv"));
}

TEST(Cli, ByteIdenticalAcrossRunsAndThreads) {
  TempDir t;
  const auto cfg = t.write("c.json", slurp(fs::path(PHOTONCOND_CONFIG_DIR) / "ring.json"));
  ASSERT_EQ(cli("sweep --config " + cfg.string() + " --out " + (t.path / "a").string() + " --threads 1"), 0);
  ASSERT_EQ(cli("sweep --config " + cfg.string() + " --out " + (t.path / "b").string() + " --threads 1"), 0);
  ASSERT_EQ(cli("sweep --config " + cfg.string() + " --out " + (t.path / "c").string() + " --threads 3"), 0);
  const std::string a = slurp(t.path / "a" / "criterion.csv");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(t.path / "b" / "criterion.csv"));
  EXPECT_EQ(a, slurp(t.path / "c" / "criterion.csv"));
}

TEST(Cli, CoulombSweepNeverCondenses) {
  TempDir t;
  const auto cfg = t.write("c.json", slurp(fs::path(PHOTONCOND_CONFIG_DIR) / "coulomb_no_go.json"));
  ASSERT_EQ(cli("sweep --config " + cfg.string() + " --out " + (t.path / "o").string()), 0);
  const auto s = nlohmann::json::parse(slurp(t.path / "o" / "summary.json"));
  for (const auto& th : s["thresholds"]) {
    EXPECT_EQ(th["condensed_points"].get<int>(), 0);
    EXPECT_TRUE(th["threshold_crossing"].is_null());
  }
  EXPECT_TRUE(s["all_invariants_passed"].get<bool>());
}

TEST(Cli, ShippedConfigsValidate) {
  for (const auto& e : fs::directory_iterator(PHOTONCOND_CONFIG_DIR))
    if (e.path().extension() == ".json") EXPECT_NO_THROW(validate_config(slurp(e.path()))) << e.path();
}
