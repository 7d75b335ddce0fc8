#include "crf/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "crf/asymptotics.hpp"
#include "crf/errors.hpp"
#include "crf/stencil.hpp"

namespace crf {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double band_sup(std::span<const double> f, TrustedBand band) {
  double out = 0.0;
  for (std::size_t i = band.begin; i < band.end; ++i) out = std::max(out, std::abs(f[i]));
  return out;
}

// Derivative at t[j] of the quadratic through three neighboring samples.
double time_derivative(std::span<const double> t, std::span<const double> f, std::size_t j) {
  const std::size_t n = t.size();
  const std::size_t c = std::clamp<std::size_t>(j, 1, n - 2);
  const double t0 = t[c - 1], t1 = t[c], t2 = t[c + 1];
  const double x = t[j];
  const double w0 = ((x - t1) + (x - t2)) / ((t0 - t1) * (t0 - t2));
  const double w1 = ((x - t0) + (x - t2)) / ((t1 - t0) * (t1 - t2));
  const double w2 = ((x - t0) + (x - t1)) / ((t2 - t0) * (t2 - t1));
  return w0 * f[c - 1] + w1 * f[c] + w2 * f[c + 1];
}

// Laplacian of an even scalar: a^{-2}(f_ss - alpha_s f_s) + m h a^{-1} f_s,
// with the pole limit (m+1) a^{-2} f_ss.
std::vector<double> scalar_laplacian(const SymmetricMetric& g, std::span<const double> f) {
  const auto& space = g.space();
  const Stencil st(space);
  const std::vector<double> alpha = g.log_lapse();
  const std::vector<double> h = warp_rate(g);
  const auto a = g.a();
  const int m = g.m();
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double fss = st.second<double>(f, i, Parity::Even);
    const double inv_a2 = 1.0 / (a[i] * a[i]);
    if (space.is_pole(i)) {
      out[i] = (m + 1) * inv_a2 * fss;
      continue;
    }
    const double fs = st.first<double>(f, i, Parity::Even);
    const double as = st.first<double>(alpha, i, Parity::Even);
    out[i] = inv_a2 * (fss - as * fs) + m * h[i] * fs / a[i];
  }
  return out;
}

// |nabla^2 p| for a radial p: Hess p = e_0^2 p on the radial direction and
// h e_0 p on each fiber direction.
std::vector<double> pressure_hessian_norm(const SymmetricMetric& g, const PressureField& p) {
  const std::vector<double> h = warp_rate(g);
  const int m = g.m();
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double fiber = g.space().is_pole(i) ? p.d2p[i] : h[i] * p.dp[i];
    out[i] = std::sqrt(p.d2p[i] * p.d2p[i] + m * fiber * fiber);
  }
  return out;
}

// Orthonormal-frame size of g - g0 relative to g0.
double perturbation_size(double a, double b, double a0, double b0, int m) {
  const double ua = (a / a0) * (a / a0) - 1.0;
  const double ub = (b / b0) * (b / b0) - 1.0;
  return std::sqrt(ua * ua + m * ub * ub);
}

std::pair<double, double> decay_window(const ModelSpace& space) {
  const double s_max = space.grid().extent();
  return {s_max - 4.0, s_max - 1.0};
}

double fit_or_nan(std::span<const double> field, const RadialGrid& grid,
                  std::pair<double, double> window) {
  const auto mu = decay_rate_fit(field, grid, window.first, window.second);
  return mu ? *mu : kNaN;
}

}  // namespace

const std::vector<std::string>& diagnostics_columns() {
  static const std::vector<std::string> columns{
      "t",       "constraint_drift", "sup_rm",  "sup_grad_rm", "shi_1",      "shi_2",
      "p_sup",   "dp_sup",           "d2p_sup", "d3p_sup",     "decay_mu_u", "decay_mu_p"};
  return columns;
}

bool DiagnosticsReport::passed() const {
  return std::all_of(verdicts.begin(), verdicts.end(),
                     [](const Verdict& v) { return v.passed || !v.required; });
}

std::vector<double> shi_quantity(const Trajectory& traj, int k) {
  if (k != 1 && k != 2) {
    throw InvalidArgument(fmt::format("Shi quantity is available for k = 1, 2 (got {})", k));
  }
  std::vector<double> out;
  out.reserve(traj.snapshots.size());
  for (const FlowState& snap : traj.snapshots) {
    const TrustedBand band = trusted_band(snap.metric.space());
    if (k == 1) {
      out.push_back(std::sqrt(snap.t) * band_sup(snap.curv.grad_rm_norm, band));
    } else {
      const std::vector<double> d2 = second_gradient_rm_norm(snap.metric, snap.curv);
      out.push_back(snap.t * band_sup(d2, band));
    }
  }
  return out;
}

HypothesisCheck hypothesis_check(const Trajectory& traj, double alpha) {
  HypothesisCheck out;
  out.alpha = alpha;
  for (const FlowState& snap : traj.snapshots) {
    const TrustedBand band = trusted_band(snap.metric.space());
    for (std::size_t i = band.begin; i < band.end; ++i) {
      out.k_observed = std::max(out.k_observed, std::sqrt(snap.curv.norm_rm_sq[i]));
    }
    const PressureBoundsReport bounds =
        verify_pressure_bounds(snap.pressure, 0.0, band.begin, band.end);
    for (double v : bounds.suprema) out.k_tilde_observed = std::max(out.k_tilde_observed, v);
  }
  out.t_end = traj.snapshots.empty() ? 0.0 : traj.snapshots.back().t;
  out.time_limit = out.k_observed > 0.0 ? alpha / out.k_observed
                                        : std::numeric_limits<double>::infinity();
  if (traj.halted()) {
    out.inside = false;
    out.reason = fmt::format("curvature bound exceeded at t = {:.6g}", traj.halt_time);
  } else if (out.t_end > out.time_limit) {
    out.inside = false;
    out.reason = fmt::format("t_end = {:.6g} exceeds alpha / K = {:.6g}", out.t_end,
                             out.time_limit);
  } else {
    out.inside = true;
  }
  return out;
}

std::vector<double> constraint_drift(const Trajectory& traj) {
  std::vector<double> out;
  out.reserve(traj.snapshots.size());
  for (const FlowState& snap : traj.snapshots) {
    const TrustedBand band = trusted_band(snap.metric.space());
    const double target = snap.metric.scalar_target();
    double drift = 0.0;
    for (std::size_t i = band.begin; i < band.end; ++i) {
      drift = std::max(drift, std::abs(snap.curv.scalar[i] - target));
    }
    out.push_back(drift);
  }
  return out;
}

std::vector<double> evolution_residual(const Trajectory& traj) {
  const std::size_t count = traj.snapshots.size();
  if (count < 3) throw InvalidArgument("evolution residual needs at least three snapshots");
  const bool gauged = traj.mode == FlowMode::Dcrf;
  if (gauged && traj.gauges.size() != count) {
    throw InvalidArgument("DCRF trajectory is missing its gauge maps");
  }
  std::vector<double> times(count);
  for (std::size_t k = 0; k < count; ++k) times[k] = traj.snapshots[k].t;

  std::vector<double> series(count);
  std::vector<double> out(count, 0.0);
  for (std::size_t k = 0; k < count; ++k) {
    const FlowState& snap = traj.snapshots[k];
    const SymmetricMetric& g = snap.metric;
    const TrustedBand band = trusted_band(g.space());
    const Stencil st(g.space());
    const std::vector<double>& f = snap.curv.norm_rm_sq;
    const std::vector<double> lap = scalar_laplacian(g, f);
    const std::vector<double> hess_p = pressure_hessian_norm(g, snap.pressure);
    const double c = std::abs(g.einstein_c());
    double worst = 0.0;
    for (std::size_t i = band.begin; i < band.end; ++i) {
      for (std::size_t j = 0; j < count; ++j) series[j] = traj.snapshots[j].curv.norm_rm_sq[i];
      double dt_f = time_derivative(times, series, k);
      // h_t = (CRF velocity) + L_W h, so scalars pick up W f_s.
      if (gauged) dt_f -= traj.gauges[k].w_field[i] * st.first<double>(f, i, Parity::Even);
      const double rm = std::sqrt(f[i]);
      const double grad = snap.curv.grad_rm_norm[i];
      const double bound = -2.0 * grad * grad + 16.0 * rm * rm * rm +
                           4.0 * (std::abs(snap.pressure.p[i]) + 2.0 * c) * f[i] +
                           8.0 * rm * hess_p[i];
      worst = std::max(worst, dt_f - lap[i] - bound);
    }
    out[k] = worst;
  }
  return out;
}

std::vector<GaugeComparisonRow> compare_gauges(const Trajectory& crf, const Trajectory& dcrf,
                                               double s_lo, double s_hi) {
  if (crf.mode != FlowMode::Crf || dcrf.mode != FlowMode::Dcrf) {
    throw InvalidArgument("gauge comparison needs a CRF and a DCRF trajectory");
  }
  if (dcrf.gauges.size() != dcrf.snapshots.size()) {
    throw InvalidArgument("DCRF trajectory is missing its gauge maps");
  }
  const std::size_t count = std::min(crf.snapshots.size(), dcrf.snapshots.size());
  std::vector<GaugeComparisonRow> out;
  for (std::size_t k = 0; k < count; ++k) {
    const FlowState& g = crf.snapshots[k];
    const FlowState& h = dcrf.snapshots[k];
    if (!(g.metric.space() == h.metric.space())) {
      throw InvalidArgument("gauge comparison needs both runs on the same grid");
    }
    if (std::abs(g.t - h.t) > 1e-12 * std::max(1.0, g.t)) {
      throw InvalidArgument("gauge comparison needs matching snapshot times");
    }
    const ModelSpace& space = g.metric.space();
    const std::vector<double>& phi = dcrf.gauges[k].phi;
    const std::vector<double> scalar_h = sample_field(space, h.curv.scalar, phi);
    const std::vector<double> rm_h = sample_field(space, h.curv.norm_rm_sq, phi);
    GaugeComparisonRow row;
    row.t = g.t;
    for (std::size_t i = 0; i < space.size(); ++i) {
      if (i > 0 && !(phi[i] > phi[i - 1])) row.phi_monotone = false;
      const double s = space.grid()[i];
      if (s < s_lo - 1e-12 || s > s_hi + 1e-12) continue;
      row.scalar_discrepancy =
          std::max(row.scalar_discrepancy, std::abs(g.curv.scalar[i] - scalar_h[i]));
      row.rm_sq_discrepancy =
          std::max(row.rm_sq_discrepancy, std::abs(g.curv.norm_rm_sq[i] - rm_h[i]));
    }
    out.push_back(row);
  }
  return out;
}

std::pair<double, double> trusted_window(const ModelSpace& space) {
  const TrustedBand band = trusted_band(space);
  return {space.grid()[band.begin], space.grid()[band.end - 1]};
}

DiagnosticsReport emit_report(const Trajectory& traj, const ReportSettings& settings) {
  if (traj.snapshots.empty()) throw InvalidArgument("cannot report on an empty trajectory");
  DiagnosticsReport report;
  const std::vector<double> drift = constraint_drift(traj);
  const std::vector<double> shi1 = shi_quantity(traj, 1);
  const std::vector<double> shi2 = shi_quantity(traj, 2);
  const FlowState& first = traj.snapshots.front();
  const ModelSpace& space = first.metric.space();
  const bool ball = space.topology() == Topology::Ball;
  const auto window = decay_window(space);

  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    const FlowState& snap = traj.snapshots[k];
    const TrustedBand band = trusted_band(snap.metric.space());
    DiagnosticsRow row;
    row.t = snap.t;
    row.constraint_drift = drift[k];
    for (std::size_t i = band.begin; i < band.end; ++i) {
      row.sup_rm = std::max(row.sup_rm, std::sqrt(snap.curv.norm_rm_sq[i]));
    }
    row.sup_grad_rm = band_sup(snap.curv.grad_rm_norm, band);
    row.shi_1 = shi1[k];
    row.shi_2 = shi2[k];
    const auto bounds = verify_pressure_bounds(snap.pressure, 0.0, band.begin, band.end);
    row.p_sup = bounds.suprema[0];
    row.dp_sup = bounds.suprema[1];
    row.d2p_sup = bounds.suprema[2];
    row.d3p_sup = bounds.suprema[3];
    row.decay_mu_u = kNaN;
    row.decay_mu_p = kNaN;
    if (ball) {
      const auto a = snap.metric.a(), b = snap.metric.b();
      const auto a0 = first.metric.a(), b0 = first.metric.b();
      std::vector<double> u(a.size(), 0.0);
      for (std::size_t i = 1; i < a.size(); ++i) {
        u[i] = perturbation_size(a[i], b[i], a0[i], b0[i], snap.metric.m());
      }
      row.decay_mu_u = fit_or_nan(u, space.grid(), window);
      row.decay_mu_p = fit_or_nan(snap.pressure.p, space.grid(), window);
    }
    report.rows.push_back(row);
  }

  report.hypothesis = hypothesis_check(traj, settings.alpha);
  report.k_observed = report.hypothesis.k_observed;
  report.k_tilde_observed = report.hypothesis.k_tilde_observed;
  for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
    report.constraint_band = std::max(report.constraint_band, drift[k]);
    report.shi_constant_1 = std::max(report.shi_constant_1, shi1[k]);
    report.shi_constant_2 = std::max(report.shi_constant_2, shi2[k]);
  }
  if (report.k_observed > 0.0) report.shi_constant_1 /= report.k_observed;

  report.partial = traj.halted();
  report.halt_reason = traj.halt_reason;

  report.verdicts.push_back({"coherent", !traj.halted(), true,
                             traj.halted() ? traj.halt_reason : std::string()});
  report.verdicts.push_back(
      {"constraint_drift", report.constraint_band <= settings.drift_band, true,
       fmt::format("max drift {:.3e}, band {:.3e}", report.constraint_band,
                   settings.drift_band)});
  if (traj.snapshots.size() >= 3) {
    const std::vector<double> violation = evolution_residual(traj);
    report.evolution_violation = *std::max_element(violation.begin(), violation.end());
    report.verdicts.push_back(
        {"evolution_inequality", report.evolution_violation <= settings.evolution_tolerance,
         true, fmt::format("max violation {:.3e}", report.evolution_violation)});
  } else {
    report.evolution_violation = kNaN;
    report.verdicts.push_back(
        {"evolution_inequality", false, false, "needs at least three snapshots"});
  }
  report.verdicts.push_back(
      {"hypothesis_regime", report.hypothesis.inside, false, report.hypothesis.reason});
  return report;
}

}  // namespace crf
