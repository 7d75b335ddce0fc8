// Command-line driver: `crf run <config>` and `crf validate <config>`.

#include <cstdio>
#include <filesystem>
#include <string>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "crf/config.hpp"
#include "crf/scenario.hpp"

namespace {

void print_verdicts(const std::vector<crf::Verdict>& verdicts) {
  for (const crf::Verdict& v : verdicts) {
    fmt::print("    {:<22} {}{}  {}\n", v.name, v.passed ? "pass" : "FAIL",
               v.required ? "" : " (info)", v.detail);
  }
}

void print_summary(const crf::FlowConfig& config, const crf::ScenarioResult& result) {
  for (const crf::RunResult& run : result.runs) {
    fmt::print("{} n_points = {}\n", crf::to_string(config.mode), run.n_points);
    if (!run.failure.empty()) {
      fmt::print("    failed: {}\n", run.failure);
      continue;
    }
    const crf::DiagnosticsReport& r = run.report;
    fmt::print("    steps {}, t_end {:.6g}, K {:.6g}, K~ {:.6g}\n", run.primary().steps,
               r.rows.back().t, r.k_observed, r.k_tilde_observed);
    fmt::print("    constraint band {:.3e}, Shi constants {:.4g} / {:.4g}\n", r.constraint_band,
               r.shi_constant_1, r.shi_constant_2);
    if (r.partial) fmt::print("    partial run: {}\n", r.halt_reason);
    if (!run.comparison.empty()) {
      const crf::GaugeComparisonRow& last = run.comparison.back();
      fmt::print("    gauge comparison at t = {:.6g}: dR {:.3e}, d|Rm|^2 {:.3e}\n", last.t,
                 last.scalar_discrepancy, last.rm_sq_discrepancy);
    }
    print_verdicts(r.verdicts);
  }
  for (const crf::ConvergenceRow& row : result.convergence) {
    fmt::print("convergence of {}: fitted order {:.3f}\n", row.quantity, row.fitted_order);
  }
  if (!result.verdicts.empty()) {
    fmt::print("scenario\n");
    print_verdicts(result.verdicts);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conformal Ricci flow on symmetry-reduced geometries"};
  app.require_subcommand(1);

  std::string run_path;
  std::string out_dir;
  bool check = false;
  CLI::App* run = app.add_subcommand("run", "Run the scenario described by a config file");
  run->add_option("config", run_path, "Config file")->required();
  run->add_flag("--check", check, "Exit with status 4 when a required verdict fails");
  run->add_option("--out", out_dir, "Output directory (overrides output.directory)");

  std::string validate_path;
  CLI::App* validate = app.add_subcommand("validate", "Parse a config and print it resolved");
  validate->add_option("config", validate_path, "Config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? crf::kExitSuccess : crf::kExitConfig;
  }

  crf::FlowConfig config;
  try {
    config = crf::load_config(run->parsed() ? run_path : validate_path);
  } catch (const crf::Error& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return crf::kExitConfig;
  }

  if (validate->parsed()) {
    fmt::print("{}", crf::echo_config(config));
    return crf::kExitSuccess;
  }

  const std::filesystem::path directory = out_dir.empty() ? config.directory : out_dir;
  const crf::ScenarioResult result = crf::run_scenario(config, check);
  try {
    crf::write_artifacts(config, result, directory);
  } catch (const crf::Error& e) {
    fmt::print(stderr, "{}\n", e.what());
    return crf::kExitSolver;
  }
  print_summary(config, result);
  fmt::print("artifacts in {}\nexit status {}\n", directory.string(), result.exit_code);
  return result.exit_code;
}
