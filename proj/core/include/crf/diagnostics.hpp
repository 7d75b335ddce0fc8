#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "crf/flow.hpp"

namespace crf {

/// One row per snapshot. Suprema are over the trusted band; decay exponents
/// are NaN where the fit is undefined (t = 0, p = 0, closed families).
struct DiagnosticsRow {
  double t = 0.0;
  double constraint_drift = 0.0;
  double sup_rm = 0.0;
  double sup_grad_rm = 0.0;
  double shi_1 = 0.0;
  double shi_2 = 0.0;
  double p_sup = 0.0;
  double dp_sup = 0.0;
  double d2p_sup = 0.0;
  double d3p_sup = 0.0;
  double decay_mu_u = 0.0;
  double decay_mu_p = 0.0;
};

/// Column names of DiagnosticsRow in declaration order.
const std::vector<std::string>& diagnostics_columns();

struct Verdict {
  std::string name;
  bool passed = false;
  /// Only required verdicts count toward a check-mode failure.
  bool required = true;
  std::string detail;
};

struct HypothesisCheck {
  double alpha = 0.1;
  /// max over snapshots of sup |Rm|.
  double k_observed = 0.0;
  /// max over snapshots of the four pressure-derivative suprema.
  double k_tilde_observed = 0.0;
  /// alpha / k_observed.
  double time_limit = 0.0;
  double t_end = 0.0;
  bool inside = false;
  std::string reason;
};

/// Tolerances for the summary verdicts.
struct ReportSettings {
  double alpha = 0.1;
  double drift_band = 1e-4;
  double evolution_tolerance = 1e-10;
};

struct DiagnosticsReport {
  std::vector<DiagnosticsRow> rows;
  double k_observed = 0.0;
  double k_tilde_observed = 0.0;
  /// Fitted Shi constants: sup_t sqrt(t) |nabla Rm| / K and sup_t t |nabla^2 Rm|.
  double shi_constant_1 = 0.0;
  double shi_constant_2 = 0.0;
  /// max over snapshots of the constraint drift.
  double constraint_band = 0.0;
  double evolution_violation = 0.0;
  HypothesisCheck hypothesis;
  std::vector<Verdict> verdicts;
  bool partial = false;
  std::string halt_reason;

  bool passed() const;
};

/// t^{k/2} sup |nabla^k Rm| per snapshot, k = 1 or 2.
std::vector<double> shi_quantity(const Trajectory& traj, int k);

/// K, K~ and whether t_end <= alpha / K. A halted run is never inside.
HypothesisCheck hypothesis_check(const Trajectory& traj, double alpha);

/// sup |R - scalar_target| per snapshot.
std::vector<double> constraint_drift(const Trajectory& traj);

/// max(0, (d_t - Delta)|Rm|^2 - bound) with
/// bound = -2|nabla Rm|^2 + 16|Rm|^3 + 4(|p| + 2|c|)|Rm|^2 + 8|Rm||nabla^2 p|,
/// the time derivative taken by second-order differences across snapshots.
/// Requires at least three snapshots with uniform spacing and a CRF-gauge
/// trajectory (fixed coordinates). Returns the sup over the trusted band.
std::vector<double> evolution_residual(const Trajectory& traj);

/// Agreement of scalar invariants between a direct CRF run and a DCRF run
/// composed with its gauge map: R_g(s) against R_h(phi(s)).
struct GaugeComparisonRow {
  double t = 0.0;
  double scalar_discrepancy = 0.0;
  double rm_sq_discrepancy = 0.0;
  bool phi_monotone = true;
};

/// Compares the two runs snapshot by snapshot over nodes with s in
/// [s_lo, s_hi]. Both runs must share grid and snapshot times.
std::vector<GaugeComparisonRow> compare_gauges(const Trajectory& crf, const Trajectory& dcrf,
                                               double s_lo, double s_hi);

/// Physical coordinates of the trusted band, for comparisons across grids.
std::pair<double, double> trusted_window(const ModelSpace& space);

/// Assembles rows, summary and verdicts. Deterministic in the trajectory.
DiagnosticsReport emit_report(const Trajectory& traj, const ReportSettings& settings = {});

}  // namespace crf
