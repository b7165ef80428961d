#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "eplab/cli/commands.hpp"
#include "eplab/cli/manifest.hpp"
#include "eplab/cli/scenario.hpp"
#include "eplab/csv.hpp"
#include "eplab/error.hpp"
#include "eplab/phase.hpp"

using namespace eplab;
using namespace eplab::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("eplab_test_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream f(p);
  std::string line;
  while (std::getline(f, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

std::string scenario(const std::string& name) { return std::string(EPLAB_SCENARIO_DIR) + "/" + name; }

int run_cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " \"" EPLAB_CLI_PATH "\" " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

json valid_doc() {
  return json::parse(R"({"d": 3, "horizon": 10, "grid": {"r_max": 6, "n_points": 17, "clustering": 2},
                         "data": {"kind": "gaussian", "parameters": {"amplitude": 0.3, "width": 1}}})");
}

std::string parse_error(const json& doc) {
  try {
    parse_scenario(doc);
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Csv, ShortestRoundTrip) {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 6.230977887516526, 0.0}) {
    EXPECT_EQ(std::stod(csv::format(x)), x);
  }
  EXPECT_EQ(csv::format(0.1), "0.1");
  EXPECT_EQ(csv::format(std::numeric_limits<double>::quiet_NaN()), "nan");
  EXPECT_EQ(csv::format(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(csv::format(std::optional<double>{}), "");
}

TEST(Csv, TableChecksRowWidth) {
  csv::Table t({"a", "b"});
  t.add(csv::Table::Row() << 1 << 0.5);
  EXPECT_THROW(t.add(csv::Table::Row() << 1.0), InputError);
  EXPECT_EQ(t.str(), "a,b\n1,0.5\n");
}

TEST(Scenario, ParsesAndResolvesDefaults) {
  const auto f = parse_scenario(valid_doc());
  EXPECT_EQ(f.scenario.d.value(), 3);
  EXPECT_EQ(f.scenario.r0_grid.size(), 17u);
  EXPECT_EQ(f.scenario.snapshot_times.size(), default_snapshot_count);
  EXPECT_EQ(f.resolved["tolerances"]["rel"].get<double>(), 1e-10);
  EXPECT_EQ(f.scenario.snapshot_times.back(), 10.0);

  json listed = valid_doc();
  listed["snapshots"] = {0.0, 2.5, 10.0};
  EXPECT_EQ(parse_scenario(listed).scenario.snapshot_times, (std::vector<double>{0.0, 2.5, 10.0}));

  json tab = json::parse(R"({"d": 3, "horizon": 5, "data": {"kind": "tabulated", "parameters": {"rows":
      [[0, 0, 0.1], [0.5, 0, 0.1], [1, 0, 0.1], [1.5, 0, 0.1], [2, 0, 0.1]]}}})");
  const auto t = parse_scenario(tab);
  EXPECT_EQ(t.scenario.r0_grid.size(), 5u);
  EXPECT_EQ(t.scenario.G0(0.75), 0.1);
}

TEST(Scenario, FieldLevelErrors) {
  json d = valid_doc();
  d.erase("d");
  EXPECT_NE(parse_error(d).find("scenario.d"), std::string::npos);

  json h = valid_doc();
  h["horizon"] = -1;
  EXPECT_NE(parse_error(h).find("scenario.horizon"), std::string::npos);

  json k = valid_doc();
  k["data"]["kind"] = "vortex";
  EXPECT_NE(parse_error(k).find("scenario.data"), std::string::npos);

  json p = valid_doc();
  p["data"]["parameters"].erase("width");
  EXPECT_NE(parse_error(p).find("width"), std::string::npos);

  json g = valid_doc();
  g["grid"]["n_points"] = "many";
  EXPECT_NE(parse_error(g).find("scenario.grid.n_points"), std::string::npos);

  json dense = valid_doc();
  dense["data"]["parameters"]["amplitude"] = 0.4;  // 1 - 3 G0 < 0 on the axis
  EXPECT_NE(parse_error(dense).find("density"), std::string::npos);

  EXPECT_THROW(load_scenario("/nonexistent/scenario.json"), InputError);
}

TEST(Manifest, HashTracksParameters) {
  RunManifest a{"phase", {{"g_plus", 0.1}}, {}, {}, 0.0};
  RunManifest b = a;
  b.wall_clock_seconds = 12.0;
  b.outputs = {"phase.csv"};
  EXPECT_EQ(a.config_hash(), b.config_hash());
  EXPECT_EQ(a.config_hash().size(), 16u);
  b.parameters["g_plus"] = 0.2;
  EXPECT_NE(a.config_hash(), b.config_hash());
  EXPECT_EQ(a.to_json()["version"], artifact_version);
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
}

TEST(Commands, PhaseWritesClosedOrbits) {
  PhaseOptions o;
  o.common.out = scratch("phase").string();
  o.common.svg = true;
  o.samples = 101;
  const auto m = cmd_phase(o);
  EXPECT_EQ(m.outputs, (std::vector<std::string>{"phase.csv", "phase.svg", "manifest.json"}));
  const auto rows = read_csv(fs::path(o.common.out) / "phase.csv");
  ASSERT_EQ(rows.size(), 1 + 5 * 101u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"d", "t", "g", "f"}));
  for (std::size_t i = 1; i < rows.size(); i += 101) {
    EXPECT_NEAR(std::stod(rows[i][2]), 0.1, 1e-12);
    EXPECT_NEAR(std::stod(rows[i][3]), 0.0, 1e-12);
    EXPECT_NEAR(std::stod(rows[i + 100][2]), 0.1, 1e-7);  // closes after one period
  }
  EXPECT_TRUE(fs::exists(fs::path(o.common.out) / "manifest.json"));
}

TEST(Commands, PhaseAtRestWarns) {
  PhaseOptions o;
  o.g_plus = 0.0;
  o.common.out = scratch("phase0").string();
  const auto m = cmd_phase(o);
  EXPECT_EQ(m.warnings.size(), 1u);
  EXPECT_EQ(read_csv(fs::path(o.common.out) / "phase.csv").size(), 6u);

  o.g_plus = 0.6;
  o.dims = {2};
  EXPECT_THROW(cmd_phase(o), InputError);
}

TEST(Commands, PeriodForD4IsFlat) {
  PeriodOptions o;
  o.d = 4;
  o.step = 0.02;
  o.common.out = scratch("period").string();
  cmd_period(o);
  const auto rows = read_csv(fs::path(o.common.out) / "period.csv");
  EXPECT_EQ(rows[0], (std::vector<std::string>{"g_plus", "t_event", "t_quadrature", "t_asymptotic"}));
  ASSERT_EQ(rows.size(), 13u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_NEAR(std::stod(rows[i][1]), phase::two_pi, 1e-7);
    EXPECT_NEAR(std::stod(rows[i][2]), phase::two_pi, 1e-7);
  }
}

TEST(Commands, FloquetForD1IsNeutral) {
  FloquetOptions o;
  o.dims = {1};
  o.step = 0.05;
  o.common.out = scratch("floquet").string();
  cmd_floquet(o);
  const auto rows = read_csv(fs::path(o.common.out) / "floquet_d1.csv");
  ASSERT_EQ(rows.size(), 10u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_NEAR(std::stod(rows[i][3]), 1.0, 1e-6);
    EXPECT_EQ(rows[i][5], "neutral");
  }
  o.step = 0.6;
  EXPECT_THROW(cmd_floquet(o), InputError);
}

TEST(Commands, EvolveBundledScenarios) {
  EvolveOptions o;
  o.scenario_path = scenario("gaussian_d3.json");
  o.common.out = scratch("evolve").string();
  const auto res = cmd_evolve(o);
  EXPECT_EQ(res.verdict, fields::Verdict::blowup);
  ASSERT_TRUE(res.t_star.has_value());
  EXPECT_NEAR(*res.t_star, 58.3535891, 1e-6);  // regression anchor
  const json report = json::parse(slurp(fs::path(o.common.out) / "report.json"));
  EXPECT_EQ(report["verdict"], "blowup");
  EXPECT_EQ(report["tracks"].size(), 129u);
  const auto snaps = read_csv(fs::path(o.common.out) / "snapshots.csv");
  EXPECT_EQ(snaps[0], (std::vector<std::string>{"t", "r", "f", "g", "n", "u", "v"}));

  o.scenario_path = scenario("affine.json");
  o.common.out = scratch("evolve_affine").string();
  EXPECT_EQ(cmd_evolve(o).verdict, fields::Verdict::smooth_to_horizon);

  o.scenario_path = scenario("example1_simplewave.json");
  o.horizon = 20.0;
  o.common.out = scratch("evolve_example").string();
  EXPECT_EQ(cmd_evolve(o).verdict, fields::Verdict::smooth_to_horizon);
}

TEST(Commands, SimpleWaveReport) {
  SimpleWaveOptions o;
  o.constant = -2.0;
  o.common.out = scratch("simplewave").string();
  cmd_simplewave(o);
  const json rep = json::parse(slurp(fs::path(o.common.out) / "admissibility.json"));
  EXPECT_TRUE(rep["admissible"].get<bool>());
  EXPECT_NEAR(rep["f0_limit_r_to_infinity"].get<double>(), 1.0 / std::sqrt(2.0), 1e-15);

  o.d = 3;
  o.constant = 0.5;
  o.common.out = scratch("simplewave_bad").string();
  EXPECT_THROW(cmd_simplewave(o), InputError);
  const json bad = json::parse(slurp(fs::path(o.common.out) / "admissibility.json"));
  EXPECT_FALSE(bad["admissible"].get<bool>());

  o.beta = 0.3;
  EXPECT_THROW(cmd_simplewave(o), InputError);  // both --c and --beta
}

TEST(Commands, TrackReportsBlowup) {
  TrackOptions o;
  o.common.out = scratch("track").string();
  o.horizon = 3000.0;
  cmd_track(o);
  const json b = json::parse(slurp(fs::path(o.common.out) / "blowup.json"));
  EXPECT_TRUE(b["blown_up"].get<bool>());
  EXPECT_NEAR(b["t_star"].get<double>(), 145.49, 0.01);
  const auto rows = read_csv(fs::path(o.common.out) / "track.csv");
  EXPECT_EQ(rows[0].size(), 12u);
  EXPECT_EQ(rows[0][9], "div_v");
}

TEST(Commands, RerunsAreByteIdentical) {
  const auto da = scratch("det_a"), db = scratch("det_b");
  EvolveOptions o;
  o.scenario_path = scenario("gaussian_d3.json");
  o.horizon = 30.0;
  o.common.out = da.string();
  o.common.threads = 1;
  const auto a = cmd_evolve(o);
  o.common.out = db.string();
  o.common.threads = 4;
  const auto b = cmd_evolve(o);
  EXPECT_EQ(a.manifest.config_hash(), b.manifest.config_hash());
  for (const char* f : {"snapshots.csv", "diagnostics.csv", "axial_density.csv"}) {
    const std::string x = slurp(da / f);
    EXPECT_FALSE(x.empty()) << f;
    EXPECT_EQ(x, slurp(db / f)) << f;
  }
}

TEST(Executable, WorkerCountDoesNotChangeBytes) {
  const auto a = scratch("exe_a"), b = scratch("exe_b");
  ASSERT_EQ(run_cli("floquet --d 3 --step 0.03 --out " + a.string(), "EPLAB_THREADS=1"), 0);
  ASSERT_EQ(run_cli("floquet --d 3 --step 0.03 --out " + b.string(), "EPLAB_THREADS=3"), 0);
  EXPECT_EQ(slurp(a / "floquet_d3.csv"), slurp(b / "floquet_d3.csv"));
}

TEST(Executable, ExitCodes) {
  const auto out = scratch("exe_rc").string();
  EXPECT_EQ(run_cli("phase --d 2 --g-plus 0.6 --out " + out), 2);
  EXPECT_EQ(run_cli("phase --g-plus 0 --out " + out), 0);
  EXPECT_EQ(run_cli("floquet --d 3 --step 0.6 --out " + out), 2);
  EXPECT_EQ(run_cli("evolve /nonexistent.json --out " + out), 2);
  EXPECT_EQ(run_cli("evolve " + scenario("gaussian_d3.json") + " --horizon 70 --out " + out), 0);
  EXPECT_EQ(run_cli("track --v0 0.5 --out " + out), 2);
  EXPECT_EQ(run_cli("nonsense"), 2);
  EXPECT_EQ(run_cli("--help"), 0);
  EXPECT_EQ(run_cli("--version"), 0);
}
