#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "crf/config.hpp"
#include "crf/diagnostics.hpp"
#include "crf/flow.hpp"

namespace crf {

/// Process exit codes of the command-line driver.
enum ExitCode : int {
  kExitSuccess = 0,
  kExitConfig = 1,
  kExitSolver = 2,
  kExitDegeneration = 3,
  kExitVerdict = 4,
};

/// Initial data for a config on a grid of n points: background, perturbation
/// and (when requested) conformal normalization. Throws SolverError when the
/// normalization fails.
SymmetricMetric initial_metric(const FlowConfig& config, std::size_t n_points);

/// Everything a single grid produced.
struct RunResult {
  std::size_t n_points = 0;
  /// Direct CRF run (CRF and BOTH_COMPARE modes).
  std::optional<Trajectory> crf;
  /// DCRF run (DCRF and BOTH_COMPARE modes).
  std::optional<Trajectory> dcrf;
  /// Report of the primary trajectory: CRF if present, otherwise DCRF.
  DiagnosticsReport report;
  /// BOTH_COMPARE: report of the DCRF run.
  std::optional<DiagnosticsReport> dcrf_report;
  /// BOTH_COMPARE only.
  std::vector<GaugeComparisonRow> comparison;
  /// Normalization data (AH with normalize = true).
  int newton_iterations = 0;
  double normalization_residual = 0.0;
  /// Failure before any trajectory existed (normalization, solver setup).
  std::string failure;
  int exit_code = kExitSuccess;

  const Trajectory& primary() const { return crf ? *crf : *dcrf; }
};

/// Runs one grid. Gauge comparisons use nodes with s in [s_lo, s_hi]; pass a
/// negative s_hi to use the trusted window of this grid.
RunResult run_flow(const FlowConfig& config, std::size_t n_points, double s_lo = 0.0,
                   double s_hi = -1.0);

/// Observed convergence of one quantity along a refinement ladder.
struct ConvergenceRow {
  std::string quantity;
  std::vector<std::size_t> n_points;
  std::vector<double> values;
  /// Pairwise orders log(e_k / e_{k+1}) / log(ds_k / ds_{k+1}).
  std::vector<double> pairwise_orders;
  /// Least-squares slope of log e against log ds.
  double fitted_order = 0.0;
};

ConvergenceRow convergence_row(std::string quantity, const std::vector<std::size_t>& n_points,
                               const std::vector<double>& spacings,
                               const std::vector<double>& values);

struct ScenarioResult {
  std::vector<RunResult> runs;
  /// Ladder scenarios: final-time constraint drift and, for BOTH_COMPARE,
  /// final-time gauge discrepancies.
  std::vector<ConvergenceRow> convergence;
  std::vector<Verdict> verdicts;
  int exit_code = kExitSuccess;
};

/// Minimum fitted order of the constraint drift on normalized ladders.
inline constexpr double kConstraintOrder = 1.9;
/// Minimum fitted order of gauge discrepancies on BOTH_COMPARE ladders.
inline constexpr double kGaugeOrder = 1.0;

/// Runs the single grid or every ladder member (concurrently) and collects
/// verdicts. With `check`, failed required verdicts map to exit code 4.
ScenarioResult run_scenario(const FlowConfig& config, bool check = false);

/// Writes config echo, snapshots, diagnostics CSV, summary JSON and, where
/// applicable, the comparison and convergence tables under `directory`.
void write_artifacts(const FlowConfig& config, const ScenarioResult& result,
                     const std::filesystem::path& directory);

/// Snapshot document: t, s_values, a, b, p, k_rad, k_sph, R (plus phi for
/// DCRF), every number with 17 significant digits.
std::string snapshot_json(const FlowState& state, const FlowConfig& config,
                          const GaugeMap* gauge = nullptr);

/// Header plus one row per snapshot, columns as diagnostics_columns().
std::string diagnostics_csv(const DiagnosticsReport& report);

/// Summary document of one report.
std::string summary_json(const DiagnosticsReport& report, const FlowConfig& config,
                         const RunResult& run);

}  // namespace crf
