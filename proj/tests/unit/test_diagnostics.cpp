#include "doctest.h"

#include <bit>
#include <cmath>
#include <numbers>

#include "crf/diagnostics.hpp"
#include "crf/errors.hpp"
#include "fixtures.hpp"

using namespace crf;

namespace {

Trajectory run(const SymmetricMetric& g, double t_end, double interval, FlowMode mode = FlowMode::Crf) {
  FlowSettings settings;
  settings.mode = mode;
  settings.t_end = t_end;
  settings.snapshot_interval = interval;
  return integrate_flow(g, settings);
}

const Trajectory& hyperbolic_run() {
  static const Trajectory traj = run(fixture::hyperbolic(3, 8.0, 201), 0.02, 0.005);
  return traj;
}

const Trajectory& perturbed_run() {
  static const Trajectory traj = [] {
    Perturbation p;
    p.amplitude = 0.01;
    return run(perturb(fixture::hyperbolic(3, 8.0, 201), p), 0.02, 0.005);
  }();
  return traj;
}

bool same_bits(double x, double y) { return std::bit_cast<std::uint64_t>(x) == std::bit_cast<std::uint64_t>(y); }

}  // namespace

TEST_CASE("hyperbolic trajectory diagnostics") {
  const auto& traj = hyperbolic_run();
  REQUIRE(traj.snapshots.size() == 5);
  for (int k : {1, 2}) {
    for (double v : shi_quantity(traj, k)) CHECK(v <= 1e-8);
  }
  for (double v : constraint_drift(traj)) CHECK(v <= 1e-10);
  for (double v : evolution_residual(traj)) CHECK(v == 0.0);

  // |Rm| = sqrt(4m + 2m(m-1)) for k_rad = k_sph = -1.
  const auto inside = hypothesis_check(traj, 0.1);
  CHECK(inside.k_observed == doctest::Approx(std::sqrt(24.0)).epsilon(1e-6));
  CHECK(inside.time_limit == doctest::Approx(0.1 / std::sqrt(24.0)).epsilon(1e-6));
  CHECK(inside.inside);
  const auto outside = hypothesis_check(traj, 0.05);
  CHECK_FALSE(outside.inside);
  CHECK(outside.reason.find("exceeds alpha / K") != std::string::npos);

  const auto report = emit_report(traj);
  CHECK(report.passed());
  CHECK_FALSE(report.partial);
  for (const auto& v : report.verdicts) CHECK(v.passed);
  CHECK(report.shi_constant_1 <= 1e-8);
  CHECK(report.shi_constant_2 <= 1e-8);
}

TEST_CASE("Shi quantity argument checks") {
  CHECK_THROWS_AS(shi_quantity(hyperbolic_run(), 3), InvalidArgument);
  CHECK_THROWS_AS(shi_quantity(hyperbolic_run(), 0), InvalidArgument);
  Trajectory short_run = hyperbolic_run();
  short_run.snapshots.erase(short_run.snapshots.begin() + 2, short_run.snapshots.end());
  CHECK_THROWS_AS(evolution_residual(short_run), InvalidArgument);
  const auto report = emit_report(short_run);
  bool found = false;
  for (const auto& v : report.verdicts) {
    if (v.name == "evolution_inequality") {
      found = true;
      CHECK_FALSE(v.required);
    }
  }
  CHECK(found);
}

TEST_CASE("halted runs") {
  Trajectory traj = hyperbolic_run();
  traj.halt = HaltKind::Degeneration;
  traj.halt_reason = "warping b is not positive";
  traj.halt_time = 0.0125;
  const auto check = hypothesis_check(traj, 0.1);
  CHECK_FALSE(check.inside);
  CHECK(check.reason == "curvature bound exceeded at t = 0.0125");
  const auto report = emit_report(traj);
  CHECK(report.partial);
  CHECK(report.halt_reason == "warping b is not positive");
  CHECK_FALSE(report.passed());
}

TEST_CASE("perturbed run report") {
  const auto& traj = perturbed_run();
  const auto a = emit_report(traj);
  const auto b = emit_report(traj);
  REQUIRE(a.rows.size() == traj.snapshots.size());
  for (std::size_t k = 0; k < a.rows.size(); ++k) {
    const auto& x = a.rows[k];
    const auto& y = b.rows[k];
    for (auto field : {&DiagnosticsRow::t, &DiagnosticsRow::constraint_drift, &DiagnosticsRow::sup_rm,
                       &DiagnosticsRow::sup_grad_rm, &DiagnosticsRow::shi_1, &DiagnosticsRow::shi_2,
                       &DiagnosticsRow::p_sup, &DiagnosticsRow::dp_sup, &DiagnosticsRow::d2p_sup,
                       &DiagnosticsRow::d3p_sup, &DiagnosticsRow::decay_mu_u, &DiagnosticsRow::decay_mu_p}) {
      CHECK(same_bits(x.*field, y.*field));
    }
    CHECK(x.sup_rm >= 0.0);
    if (x.t > 0.0) {
      CHECK(std::isfinite(x.shi_1));
      CHECK(std::isfinite(x.shi_2));
      CHECK(std::isfinite(x.decay_mu_u));
    }
  }
  CHECK(std::isnan(a.rows.front().decay_mu_u));
  CHECK(a.shi_constant_1 > 0.0);
  CHECK(a.shi_constant_2 > 0.0);
  // Decay exponent of g(t) - g(0) in the far field.
  CHECK(a.rows.back().decay_mu_u == doctest::Approx(2.0).epsilon(0.1));
  CHECK(a.evolution_violation <= 1e-10);

  // K~ is the largest pressure-derivative supremum over the trusted band.
  const auto band = trusted_band(traj.snapshots.front().metric.space());
  double k_tilde = 0.0;
  for (const auto& s : traj.snapshots) {
    for (double v : verify_pressure_bounds(s.pressure, 0.0, band.begin, band.end).suprema) k_tilde = std::max(k_tilde, v);
  }
  CHECK(a.k_tilde_observed == k_tilde);
  CHECK(a.k_tilde_observed > 0.0);
}

TEST_CASE("constraint drift at t = 0 is the initial scalar defect") {
  const auto& traj = perturbed_run();
  const auto drift = constraint_drift(traj);
  const auto band = trusted_band(traj.snapshots.front().metric.space());
  double defect = 0.0;
  for (std::size_t i = band.begin; i < band.end; ++i) defect = std::max(defect, std::abs(traj.snapshots.front().curv.scalar[i] + 12.0));
  CHECK(drift.front() == defect);
}

TEST_CASE("gauge comparison of an Einstein pair") {
  const auto g = fixture::hyperbolic(3, 8.0, 201);
  const auto crf = run(g, 0.01, 0.005);
  const auto dcrf = run(g, 0.01, 0.005, FlowMode::Dcrf);
  const auto [lo, hi] = trusted_window(g.space());
  CHECK(lo >= kPoleMargin);
  CHECK(lo < kPoleMargin + g.space().spacing());
  CHECK(hi == doctest::Approx(7.0));
  const auto rows = compare_gauges(crf, dcrf, lo, hi);
  REQUIRE(rows.size() == 3);
  for (const auto& r : rows) {
    CHECK(r.scalar_discrepancy <= 1e-10);
    CHECK(r.rm_sq_discrepancy <= 1e-10);
    CHECK(r.phi_monotone);
  }
}

TEST_CASE("column names") {
  const std::vector<std::string> expected = {"t", "constraint_drift", "sup_rm", "sup_grad_rm", "shi_1", "shi_2",
                                             "p_sup", "dp_sup", "d2p_sup", "d3p_sup", "decay_mu_u", "decay_mu_p"};
  CHECK(diagnostics_columns() == expected);
}

TEST_CASE("closed c = -1 run records K~") {
  Perturbation p;
  p.amplitude = 0.01;
  const auto g = perturb(build_background({Family::Closed, 2, 1, std::numbers::pi, 61}).with_einstein_c(-1.0), p);
  const auto traj = run(g, 0.002, 0.001);
  const auto report = emit_report(traj);
  double k_tilde = 0.0;
  const auto band = trusted_band(g.space());
  for (const auto& s : traj.snapshots) {
    for (double v : verify_pressure_bounds(s.pressure, 0.0, band.begin, band.end).suprema) k_tilde = std::max(k_tilde, v);
  }
  CHECK(report.k_tilde_observed == k_tilde);
  CHECK(std::isnan(report.rows.back().decay_mu_p));
}
