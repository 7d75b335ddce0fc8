#include "crf/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>

#include <fmt/format.h>
#include "json.hpp"

#include "crf/conformal.hpp"
#include "crf/errors.hpp"

namespace crf {

namespace {

using nlohmann::json;

int halt_code(const Trajectory& traj) {
  switch (traj.halt) {
    case HaltKind::None:
      return kExitSuccess;
    case HaltKind::Degeneration:
      return kExitDegeneration;
    case HaltKind::Solver:
      return kExitSolver;
  }
  return kExitSuccess;
}

FlowSettings flow_settings(const FlowConfig& config, FlowMode mode) {
  FlowSettings settings;
  settings.mode = mode;
  settings.t_end = config.t_end;
  settings.cfl_sigma = config.cfl_sigma;
  settings.snapshot_interval = config.snapshot_interval;
  settings.pressure.tolerance = config.elliptic;
  return settings;
}

ReportSettings report_settings(const FlowConfig& config) {
  return {config.alpha, config.drift_band, config.evolution};
}

std::string number(double v) { return fmt::format("{:.17g}", v); }

void append_array(std::string& out, std::string_view key, std::span<const double> values) {
  out += fmt::format("  \"{}\": [", key);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ", ";
    out += std::isfinite(values[i]) ? number(values[i]) : std::string("null");
  }
  out += "]";
}

json verdicts_json(const std::vector<Verdict>& verdicts) {
  json out = json::array();
  for (const Verdict& v : verdicts) {
    out.push_back({{"name", v.name}, {"passed", v.passed}, {"required", v.required},
                   {"detail", v.detail}});
  }
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  out << text;
}

void write_trajectory(const FlowConfig& config, const Trajectory& traj,
                      const DiagnosticsReport& report, const RunResult& run,
                      const std::filesystem::path& dir) {
  if (config.write_snapshots && config.write_json) {
    for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
      const GaugeMap* gauge = k < traj.gauges.size() ? &traj.gauges[k] : nullptr;
      write_file(dir / "snapshots" / fmt::format("snapshot_{:04d}.json", k),
                 snapshot_json(traj.snapshots[k], config, gauge));
    }
  }
  if (config.write_csv) write_file(dir / "diagnostics.csv", diagnostics_csv(report));
  if (config.write_json) write_file(dir / "summary.json", summary_json(report, config, run));
}

std::string comparison_csv(const std::vector<GaugeComparisonRow>& rows, double tolerance) {
  std::string out = "t,scalar_discrepancy,rm_sq_discrepancy,phi_monotone,gauge_agreement\n";
  for (const GaugeComparisonRow& r : rows) {
    const bool agree = r.phi_monotone && r.scalar_discrepancy <= tolerance &&
                       r.rm_sq_discrepancy <= tolerance;
    out += fmt::format("{},{},{},{},{}\n", number(r.t), number(r.scalar_discrepancy),
                       number(r.rm_sq_discrepancy), r.phi_monotone ? "true" : "false",
                       agree ? "true" : "false");
  }
  return out;
}

std::string convergence_csv(const std::vector<ConvergenceRow>& rows) {
  std::string out = "quantity,n_points,value,pairwise_order,fitted_order\n";
  for (const ConvergenceRow& r : rows) {
    for (std::size_t k = 0; k < r.values.size(); ++k) {
      const std::string order = k == 0 ? "" : number(r.pairwise_orders[k - 1]);
      out += fmt::format("{},{},{},{},{}\n", r.quantity, r.n_points[k], number(r.values[k]),
                         order, number(r.fitted_order));
    }
  }
  return out;
}

// Background, perturbation and optional normalization; reports Newton data
// through `run` when given.
SymmetricMetric prepare_initial(const FlowConfig& config, std::size_t n_points,
                                RunResult* run) {
  BackgroundParams params;
  params.family = config.family;
  params.m = config.m;
  params.kappa = config.kappa;
  params.extent = config.extent();
  params.n_points = n_points;
  SymmetricMetric g = build_background(params);
  if (config.family == Family::Closed) g = g.with_einstein_c(config.c);
  g = perturb(g, config.perturbation);
  if (config.normalize && config.family == Family::AhBall) {
    ConformalResult result = conformal_normalize(g, {config.newton, 50});
    if (run) {
      run->newton_iterations = result.iterations;
      run->normalization_residual = result.residual;
    }
    g = std::move(result.metric);
  }
  return g;
}

}  // namespace

SymmetricMetric initial_metric(const FlowConfig& config, std::size_t n_points) {
  return prepare_initial(config, n_points, nullptr);
}

RunResult run_flow(const FlowConfig& config, std::size_t n_points, double s_lo, double s_hi) {
  RunResult run;
  run.n_points = n_points;
  const std::string echo = echo_config(config);
  try {
    const SymmetricMetric g = prepare_initial(config, n_points, &run);
    if (config.mode != RunMode::Dcrf) {
      run.crf = integrate_flow(g, flow_settings(config, FlowMode::Crf));
      run.crf->config_echo = echo;
    }
    if (config.mode != RunMode::Crf) {
      run.dcrf = integrate_flow(g, flow_settings(config, FlowMode::Dcrf));
      run.dcrf->config_echo = echo;
    }
    run.report = emit_report(run.primary(), report_settings(config));
    if (config.mode == RunMode::BothCompare) {
      run.dcrf_report = emit_report(*run.dcrf, report_settings(config));
      if (s_hi < 0.0) std::tie(s_lo, s_hi) = trusted_window(g.space());
      run.comparison = compare_gauges(*run.crf, *run.dcrf, s_lo, s_hi);
      double worst = 0.0;
      bool monotone = true;
      for (const GaugeComparisonRow& r : run.comparison) {
        worst = std::max({worst, r.scalar_discrepancy, r.rm_sq_discrepancy});
        monotone = monotone && r.phi_monotone;
      }
      const bool complete = run.comparison.size() == run.crf->snapshots.size() &&
                            run.comparison.size() == run.dcrf->snapshots.size();
      run.report.verdicts.push_back(
          {"gauge_agreement", monotone && complete && worst <= config.gauge, true,
           fmt::format("max discrepancy {:.3e} on s in [{:.3g}, {:.3g}], phi {}", worst, s_lo,
                       s_hi, monotone ? "monotone" : "not monotone")});
    }
    if (run.crf) run.exit_code = halt_code(*run.crf);
    if (run.exit_code == kExitSuccess && run.dcrf) run.exit_code = halt_code(*run.dcrf);
  } catch (const SolverError& e) {
    run.failure = e.what();
    run.exit_code = kExitSolver;
  } catch (const DegenerationError& e) {
    run.failure = e.what();
    run.exit_code = kExitDegeneration;
  }
  return run;
}

ConvergenceRow convergence_row(std::string quantity, const std::vector<std::size_t>& n_points,
                               const std::vector<double>& spacings,
                               const std::vector<double>& values) {
  ConvergenceRow row;
  row.quantity = std::move(quantity);
  row.n_points = n_points;
  row.values = values;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k + 1 < values.size(); ++k) {
    const bool usable = values[k] > 0.0 && values[k + 1] > 0.0;
    row.pairwise_orders.push_back(usable ? std::log(values[k] / values[k + 1]) /
                                               std::log(spacings[k] / spacings[k + 1])
                                         : nan);
  }
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (!(values[k] > 0.0)) continue;
    const double x = std::log(spacings[k]);
    const double y = std::log(values[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  const double denom = count * sxx - sx * sx;
  row.fitted_order = count >= 2 && denom > 0.0 ? (count * sxy - sx * sy) / denom : nan;
  return row;
}

ScenarioResult run_scenario(const FlowConfig& config, bool check) {
  ScenarioResult result;
  const std::vector<std::size_t> grids =
      config.ladder.empty() ? std::vector<std::size_t>{config.n_points} : config.ladder;
  double s_lo = 0.0, s_hi = -1.0;
  if (grids.size() > 1) {
    // One physical window for every member, so discrepancies are comparable.
    const ModelSpace coarse(config.family, config.m, config.kappa, config.extent(),
                            grids.front());
    std::tie(s_lo, s_hi) = trusted_window(coarse);
  }
  std::vector<std::future<RunResult>> pending;
  for (std::size_t n : grids) {
    pending.push_back(std::async(std::launch::async,
                                 [&config, n, s_lo, s_hi] { return run_flow(config, n, s_lo, s_hi); }));
  }
  for (auto& f : pending) result.runs.push_back(f.get());

  for (const RunResult& run : result.runs) {
    if (run.exit_code != kExitSuccess) {
      result.exit_code = run.exit_code;
      break;
    }
  }

  if (grids.size() > 1 && result.exit_code == kExitSuccess) {
    std::vector<double> spacings;
    for (std::size_t n : grids) spacings.push_back(config.extent() / static_cast<double>(n - 1));
    std::vector<double> drift, scalar, rm_sq;
    for (const RunResult& run : result.runs) {
      drift.push_back(run.report.rows.back().constraint_drift);
      if (!run.comparison.empty()) {
        scalar.push_back(run.comparison.back().scalar_discrepancy);
        rm_sq.push_back(run.comparison.back().rm_sq_discrepancy);
      }
    }
    result.convergence.push_back(convergence_row("constraint_drift", grids, spacings, drift));
    const bool normalized = config.normalize && config.family == Family::AhBall;
    const double drift_order = result.convergence.back().fitted_order;
    result.verdicts.push_back({"constraint_order", drift_order >= kConstraintOrder, normalized,
                               fmt::format("fitted order {:.3f}", drift_order)});
    if (config.mode == RunMode::BothCompare) {
      result.convergence.push_back(convergence_row("gauge_scalar", grids, spacings, scalar));
      result.convergence.push_back(convergence_row("gauge_rm_sq", grids, spacings, rm_sq));
      const double order = std::min(result.convergence[1].fitted_order,
                                    result.convergence[2].fitted_order);
      result.verdicts.push_back({"gauge_order", order >= kGaugeOrder, true,
                                 fmt::format("fitted order {:.3f}", order)});
    }
  }

  if (check && result.exit_code == kExitSuccess) {
    bool passed = std::all_of(result.verdicts.begin(), result.verdicts.end(),
                              [](const Verdict& v) { return v.passed || !v.required; });
    for (const RunResult& run : result.runs) passed = passed && run.report.passed();
    if (!passed) result.exit_code = kExitVerdict;
  }
  return result;
}

std::string snapshot_json(const FlowState& state, const FlowConfig& config,
                          const GaugeMap* gauge) {
  const SymmetricMetric& g = state.metric;
  std::string out = "{\n";
  out += fmt::format("  \"t\": {},\n", number(state.t));
  out += fmt::format("  \"family\": \"{}\",\n  \"m\": {},\n  \"kappa\": {},\n",
                     to_string(g.family()), g.m(), g.kappa());
  out += fmt::format("  \"einstein_c\": {},\n  \"seed\": {},\n", number(g.einstein_c()),
                     config.perturbation.seed);
  append_array(out, "s_values", g.grid().values());
  out += ",\n";
  append_array(out, "a", g.a());
  out += ",\n";
  append_array(out, "b", g.b());
  out += ",\n";
  append_array(out, "p", state.pressure.p);
  out += ",\n";
  append_array(out, "k_rad", state.curv.k_rad);
  out += ",\n";
  append_array(out, "k_sph", state.curv.k_sph);
  out += ",\n";
  append_array(out, "R", state.curv.scalar);
  if (gauge) {
    out += ",\n";
    append_array(out, "phi", gauge->phi);
  }
  out += "\n}\n";
  return out;
}

std::string diagnostics_csv(const DiagnosticsReport& report) {
  std::string out;
  const auto& columns = diagnostics_columns();
  for (std::size_t k = 0; k < columns.size(); ++k) {
    out += (k ? "," : "") + columns[k];
  }
  out += "\n";
  for (const DiagnosticsRow& r : report.rows) {
    const double values[] = {r.t,     r.constraint_drift, r.sup_rm,  r.sup_grad_rm,
                             r.shi_1, r.shi_2,            r.p_sup,   r.dp_sup,
                             r.d2p_sup, r.d3p_sup,        r.decay_mu_u, r.decay_mu_p};
    for (std::size_t k = 0; k < std::size(values); ++k) {
      out += (k ? "," : "") + number(values[k]);
    }
    out += "\n";
  }
  return out;
}

std::string summary_json(const DiagnosticsReport& report, const FlowConfig& config,
                         const RunResult& run) {
  const Trajectory& traj = run.primary();
  json doc;
  doc["mode"] = std::string(to_string(traj.mode));
  doc["n_points"] = run.n_points;
  doc["seed"] = config.perturbation.seed;
  doc["steps"] = traj.steps;
  doc["K_observed"] = report.k_observed;
  doc["K_tilde_observed"] = report.k_tilde_observed;
  doc["shi_constants"] = {{"k1", report.shi_constant_1}, {"k2", report.shi_constant_2}};
  doc["constraint_band"] = report.constraint_band;
  doc["evolution_violation"] = report.evolution_violation;
  doc["hypothesis"] = {{"alpha", report.hypothesis.alpha},
                       {"time_limit", report.hypothesis.time_limit},
                       {"t_end", report.hypothesis.t_end},
                       {"inside", report.hypothesis.inside},
                       {"reason", report.hypothesis.reason}};
  doc["normalization"] = {{"applied", config.normalize && config.family == Family::AhBall},
                          {"newton_iterations", run.newton_iterations},
                          {"residual", run.normalization_residual}};
  doc["verdicts"] = verdicts_json(report.verdicts);
  doc["passed"] = report.passed();
  doc["partial"] = report.partial;
  doc["halt_reason"] = report.halt_reason;
  doc["config"] = traj.config_echo;
  return doc.dump(2) + "\n";
}

void write_artifacts(const FlowConfig& config, const ScenarioResult& result,
                     const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  write_file(directory / "config.toml", echo_config(config));
  const bool ladder = result.runs.size() > 1;
  json scenario;
  scenario["exit_code"] = result.exit_code;
  scenario["seed"] = config.perturbation.seed;
  scenario["runs"] = json::array();
  for (const RunResult& run : result.runs) {
    const std::filesystem::path base =
        ladder ? directory / fmt::format("n{}", run.n_points) : directory;
    json entry = {{"n_points", run.n_points}, {"exit_code", run.exit_code}};
    if (!run.failure.empty()) {
      entry["failure"] = run.failure;
      scenario["runs"].push_back(entry);
      continue;
    }
    entry["passed"] = run.report.passed();
    scenario["runs"].push_back(entry);
    if (run.crf) write_trajectory(config, *run.crf, run.report, run, base / "crf");
    if (run.dcrf) {
      RunResult view = run;
      view.crf.reset();
      write_trajectory(config, *run.dcrf, run.dcrf_report ? *run.dcrf_report : run.report, view,
                       base / "dcrf");
    }
    if (!run.comparison.empty() && config.write_csv) {
      write_file(base / "comparison.csv", comparison_csv(run.comparison, config.gauge));
    }
  }
  if (!result.convergence.empty() && config.write_csv) {
    write_file(directory / "convergence.csv", convergence_csv(result.convergence));
  }
  json convergence = json::array();
  for (const ConvergenceRow& r : result.convergence) {
    convergence.push_back({{"quantity", r.quantity},
                           {"n_points", r.n_points},
                           {"values", r.values},
                           {"pairwise_orders", r.pairwise_orders},
                           {"fitted_order", r.fitted_order}});
  }
  scenario["convergence"] = convergence;
  scenario["verdicts"] = verdicts_json(result.verdicts);
  if (config.write_json) write_file(directory / "scenario.json", scenario.dump(2) + "\n");
}

}  // namespace crf
