#include "doctest.h"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "crf/scenario.hpp"

using namespace crf;
namespace fs = std::filesystem;

namespace {

FlowConfig small_ah() {
  FlowConfig c;
  c.n_points = 101;
  c.t_end = 0.01;
  c.snapshot_interval = 0.005;
  return c;
}

std::map<std::string, std::string> read_tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream text;
    text << in.rdbuf();
    out[fs::relative(entry.path(), root).string()] = text.str();
  }
  return out;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("crf_scenario_test_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("exit codes") {
  SUBCASE("hyperbolic check passes") {
    auto c = small_ah();
    const auto result = run_scenario(c, true);
    CHECK(result.exit_code == kExitSuccess);
  }
  SUBCASE("stalled normalization is a solver failure") {
    auto c = small_ah();
    c.perturbation.amplitude = 0.2;
    c.newton = 1e-300;
    const auto result = run_scenario(c, true);
    CHECK(result.exit_code == kExitSolver);
    REQUIRE(result.runs.size() == 1);
    CHECK(result.runs[0].failure.find("Newton") != std::string::npos);
  }
  SUBCASE("a collapsing closed run is a degeneration") {
    FlowConfig c;
    c.family = Family::Closed;
    c.m = 2;
    c.c = -1.0;
    c.n_points = 41;
    c.t_end = 2.0;
    c.snapshot_interval = 0.05;
    c.normalize = false;
    const auto result = run_scenario(c, false);
    CHECK(result.exit_code == kExitDegeneration);
    const auto& report = result.runs[0].report;
    CHECK(report.partial);
    CHECK(report.hypothesis.reason.rfind("curvature bound exceeded at t = ", 0) == 0);
  }
  SUBCASE("failed verdicts in check mode") {
    auto c = small_ah();
    c.perturbation.amplitude = 0.01;
    c.normalize = false;
    c.drift_band = 1e-30;
    CHECK(run_scenario(c, true).exit_code == kExitVerdict);
    CHECK(run_scenario(c, false).exit_code == kExitSuccess);
  }
}

TEST_CASE("artifacts are reproducible") {
  auto c = small_ah();
  c.perturbation.amplitude = 0.01;
  c.mode = RunMode::BothCompare;
  const auto first = scratch("a");
  const auto second = scratch("b");
  write_artifacts(c, run_scenario(c), first);
  write_artifacts(c, run_scenario(c), second);
  const auto a = read_tree(first);
  const auto b = read_tree(second);
  CHECK(a.size() >= 6);
  CHECK(a.count("config.toml") == 1);
  CHECK(a.count("crf/diagnostics.csv") == 1);
  CHECK(a.count("dcrf/summary.json") == 1);
  CHECK(a.count("comparison.csv") == 1);
  CHECK(a == b);
  CHECK(parse_config(a.at("config.toml")) == c);
  fs::remove_all(first);
  fs::remove_all(second);
}

TEST_CASE("snapshot document") {
  auto c = small_ah();
  c.perturbation.amplitude = 0.01;
  c.mode = RunMode::Dcrf;
  const auto result = run_scenario(c);
  const auto& traj = result.runs[0].primary();
  const auto& state = traj.snapshots.back();
  const auto doc = nlohmann::json::parse(snapshot_json(state, c, &traj.gauges.back()));
  for (const char* key : {"s_values", "a", "b", "p", "k_rad", "k_sph", "R", "phi"}) {
    CAPTURE(key);
    REQUIRE(doc.contains(key));
    CHECK(doc[key].size() == c.n_points);
  }
  CHECK(doc["t"].get<double>() == state.t);
  // 17 significant digits round-trip every double exactly.
  for (std::size_t i = 0; i < c.n_points; ++i) {
    CHECK(doc["a"][i].get<double>() == state.metric.a()[i]);
    CHECK(doc["p"][i].get<double>() == state.pressure.p[i]);
  }
  const auto plain = nlohmann::json::parse(snapshot_json(state, c));
  CHECK_FALSE(plain.contains("phi"));
}

TEST_CASE("diagnostics CSV") {
  const auto result = run_scenario(small_ah());
  const auto csv = diagnostics_csv(result.runs[0].report);
  std::istringstream in(csv);
  std::string header;
  std::getline(in, header);
  std::string expected;
  for (const auto& col : diagnostics_columns()) expected += (expected.empty() ? "" : ",") + col;
  CHECK(header == expected);
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == result.runs[0].report.rows.size());
}

TEST_CASE("convergence rows") {
  const std::vector<double> h = {0.04, 0.02, 0.01};
  const std::vector<double> e = {3.0 * 0.04 * 0.04, 3.0 * 0.02 * 0.02, 3.0 * 0.01 * 0.01};
  const auto row = convergence_row("drift", {201, 401, 801}, h, e);
  CHECK(row.fitted_order == doctest::Approx(2.0).epsilon(1e-12));
  REQUIRE(row.pairwise_orders.size() == 2);
  for (double o : row.pairwise_orders) CHECK(o == doctest::Approx(2.0).epsilon(1e-12));
}
