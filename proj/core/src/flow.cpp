#include "crf/flow.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <fmt/format.h>

#include "crf/errors.hpp"
#include "crf/stencil.hpp"

namespace crf {

std::string_view to_string(FlowMode mode) { return mode == FlowMode::Crf ? "CRF" : "DCRF"; }

namespace {

bool is_frozen(const ModelSpace& space, std::size_t i) {
  return space.topology() == Topology::Ball && i + 1 == space.size();
}

// Linear interpolation of a nodal field; the circle wraps.
double interpolate_linear(const ModelSpace& space, std::span<const double> f, double s) {
  const std::size_t n = space.size();
  const double ds = space.spacing();
  const double extent = space.grid().extent();
  if (space.topology() == Topology::Circle) {
    s = s - extent * std::floor(s / extent);
  } else {
    s = std::clamp(s, 0.0, extent);
  }
  const std::size_t i = std::min(static_cast<std::size_t>(s / ds), n - 2);
  const double theta = s / ds - static_cast<double>(i);
  return (1.0 - theta) * f[i] + theta * f[i + 1];
}

void check_state(const ModelSpace& space, std::span<const double> alpha,
                 std::span<const double> beta, double bound) {
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (!std::isfinite(alpha[i]) || !std::isfinite(beta[i]) || std::abs(alpha[i]) > bound ||
        std::abs(beta[i]) > bound) {
      std::ostringstream msg;
      msg << "metric degenerated at s = " << space.grid()[i];
      throw DegenerationError(msg.str());
    }
  }
}

struct StageRates {
  std::vector<double> d_alpha;
  std::vector<double> d_beta;
  std::vector<double> d_phi;
};

// dphi/dt = -W(phi), pinned at poles and at the truncated boundary.
std::vector<double> gauge_rate(const ModelSpace& space, std::span<const double> w,
                               std::span<const double> phi) {
  const std::size_t n = space.size();
  std::vector<double> w_pinned(w.begin(), w.end());
  if (space.topology() == Topology::Ball) w_pinned.back() = 0.0;
  std::vector<double> rate(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (space.is_pole(i) || is_frozen(space, i)) continue;
    rate[i] = -interpolate_linear(space, w_pinned, phi[i]);
  }
  if (space.topology() == Topology::Circle) rate.back() = rate.front();
  return rate;
}

// Without the DeTurck term the radial-diffeomorphism modes are neutral, and
// central differences leave odd-even modes next to a pole to the singular
// (beta - alpha)/s^2 coupling, which amplifies them at a rate ~ 1/(j ds)^2.
// Two O(ds^2)-consistent repairs: near-pole fourth-difference dissipation with
// weight kPoleDissipation * min(cap, max(4, 2m(m-1)/3) / j^2), and rates for
// the pole value of alpha and for beta - alpha on the first interior node taken
// from their even expansions (alpha = A + B s^2, beta - alpha proportional to
// r^2). The cap grows with m(m-1); CRF steps shrink by the same factor.
constexpr double kPoleDissipation = 0.5;

// A run whose step falls below this fraction of the initial step is degenerating.
constexpr double kMinStepFraction = 1e-3;

double dissipation_cap(int m) { return std::max(1.0, m * (m - 1) / 10.0); }

void stabilize_crf_rates(const ModelSpace& space, std::span<const double> alpha,
                         std::span<const double> beta, StageRates& rates) {
  if (space.topology() == Topology::Circle) return;
  const std::size_t n = space.size();
  const double ds = space.spacing();
  const bool sphere = space.topology() == Topology::Sphere;
  auto fourth = [&](std::span<const double> f, std::size_t i) {
    auto at = [&](long k) {
      if (k < 0) return f[static_cast<std::size_t>(-k)];
      if (k >= static_cast<long>(n)) return f[static_cast<std::size_t>(2 * (n - 1) - k)];
      return f[static_cast<std::size_t>(k)];
    };
    const long k = static_cast<long>(i);
    return at(k - 2) - 4.0 * at(k - 1) + 6.0 * at(k) - 4.0 * at(k + 1) + at(k + 2);
  };
  const std::size_t reach = std::min<std::size_t>(n / 2, 64);
  // The odd-even growth rate at node j is about 2m(m-1)/(j ds)^2.
  const double coupling = std::max(4.0, 2.0 * space.m() * (space.m() - 1) / 3.0);
  const double cap = dissipation_cap(space.m());
  for (std::size_t j = 0; j < reach; ++j) {
    const double weight =
        kPoleDissipation *
        std::min(cap, coupling / std::max(1.0, static_cast<double>(j * j))) / (ds * ds);
    for (std::size_t i : {j, n - 1 - j}) {
      if (i == n - 1 - j && !sphere) continue;
      if (is_frozen(space, i)) continue;
      rates.d_alpha[i] -= weight * fourth(alpha, i);
      rates.d_beta[i] -= weight * fourth(beta, i);
      if (!sphere || j == n - 1 - j) break;
    }
  }
  const auto r = space.reference_radius();
  auto regularize = [&](std::size_t pole, std::size_t i1, std::size_t i2) {
    rates.d_alpha[pole] = (4.0 * rates.d_alpha[i1] - rates.d_alpha[i2]) / 3.0;
    rates.d_beta[pole] = rates.d_alpha[pole];
    const double ratio = (r[i1] * r[i1]) / (r[i2] * r[i2]);
    rates.d_beta[i1] = rates.d_alpha[i1] + ratio * (rates.d_beta[i2] - rates.d_alpha[i2]);
  };
  regularize(0, 1, 2);
  if (sphere) regularize(n - 1, n - 2, n - 3);
}

StageRates stage_rates(const FlowState& state, FlowMode mode, const SymmetricMetric& g0,
                       std::span<const double> phi) {
  StageRates out;
  if (mode == FlowMode::Crf) {
    MetricVelocity v = crf_rhs(state);
    out.d_alpha = std::move(v.d_alpha);
    out.d_beta = std::move(v.d_beta);
    stabilize_crf_rates(state.metric.space(), state.metric.log_lapse(),
                        state.metric.log_warp(), out);
    return out;
  }
  const std::vector<double> w = deturck_vector_field(state.metric, g0);
  MetricVelocity v = crf_rhs(state);
  const MetricVelocity lie = lie_derivative(state.metric, w);
  const ModelSpace& space = state.metric.space();
  for (std::size_t i = 0; i < v.d_alpha.size(); ++i) {
    if (is_frozen(space, i)) continue;
    v.d_alpha[i] += lie.d_alpha[i];
    v.d_beta[i] += lie.d_beta[i];
  }
  out.d_alpha = std::move(v.d_alpha);
  out.d_beta = std::move(v.d_beta);
  if (!phi.empty()) out.d_phi = gauge_rate(space, w, phi);
  return out;
}

std::vector<double> axpy(std::span<const double> y, double h, std::span<const double> k) {
  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i] + h * k[i];
  return out;
}

std::vector<double> invert_monotone(const ModelSpace& space, std::span<const double> phi) {
  const auto s = space.grid().values();
  const std::size_t n = s.size();
  std::vector<double> inv(n);
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (j + 2 < n && phi[j + 1] < s[i]) ++j;
    const double span = phi[j + 1] - phi[j];
    const double theta = span > 0.0 ? (s[i] - phi[j]) / span : 0.0;
    inv[i] = s[j] + theta * (s[j + 1] - s[j]);
  }
  return inv;
}

void check_monotone(std::span<const double> phi, double t) {
  for (std::size_t i = 0; i + 1 < phi.size(); ++i) {
    if (!(phi[i + 1] > phi[i])) {
      std::ostringstream msg;
      msg << "gauge map lost monotonicity at t = " << t;
      throw DegenerationError(msg.str());
    }
  }
}

}  // namespace

GaugeMap identity_gauge(const ModelSpace& space) {
  GaugeMap gauge;
  const auto s = space.grid().values();
  gauge.phi.assign(s.begin(), s.end());
  gauge.phi_inverse = gauge.phi;
  gauge.w_field.assign(s.size(), 0.0);
  return gauge;
}

FlowState make_state(SymmetricMetric g, double t, const PressureSolveOptions& options) {
  CurvatureBundle curv = compute_curvature(g);
  const EllipticOperator op = assemble_operator(g);
  PressureField p = solve_pressure(op, pressure_source(curv, g.family(), g.m()), options);
  return FlowState{t, std::move(g), std::move(p), std::move(curv)};
}

MetricVelocity crf_rhs(const FlowState& state) {
  const SymmetricMetric& g = state.metric;
  const ModelSpace& space = g.space();
  const std::size_t n = g.size();
  const double c2 = 2.0 * g.einstein_c();
  const auto a = g.a();
  const auto b = g.b();
  MetricVelocity v;
  v.d_alpha.assign(n, 0.0);
  v.d_beta.assign(n, 0.0);
  v.d_a2.assign(n, 0.0);
  v.d_b2.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (is_frozen(space, i)) continue;
    const double p = state.pressure.p[i];
    v.d_alpha[i] = -(state.curv.ric_rad[i] - c2 + p);
    v.d_beta[i] = space.is_pole(i) ? v.d_alpha[i] : -(state.curv.ric_tan[i] - c2 + p);
    v.d_a2[i] = 2.0 * a[i] * a[i] * v.d_alpha[i];
    v.d_b2[i] = 2.0 * b[i] * b[i] * v.d_beta[i];
  }
  return v;
}

std::vector<double> deturck_vector_field(const SymmetricMetric& g, const SymmetricMetric& g0) {
  if (!(g.space() == g0.space())) {
    throw InvalidArgument("DeTurck field needs both metrics on the same grid");
  }
  const ModelSpace& space = g.space();
  const Stencil st(space);
  const int m = g.m();
  const std::vector<double> alpha = g.log_lapse();
  const std::vector<double> beta = g.log_warp();
  const std::vector<double> alpha0 = g0.log_lapse();
  const std::vector<double> beta0 = g0.log_warp();
  const auto L = space.reference_log_derivative();
  const std::size_t n = g.size();
  std::vector<double> w(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (space.is_pole(i)) continue;
    const double as = st.first<double>(alpha, i, Parity::Even);
    const double a0s = st.first<double>(alpha0, i, Parity::Even);
    const double bs = st.first<double>(beta, i, Parity::Even);
    const double b0s = st.first<double>(beta0, i, Parity::Even);
    const double E = std::exp(2.0 * (beta[i] - alpha[i]));
    const double E0 = std::exp(2.0 * (beta0[i] - alpha0[i]));
    // L (E - E0) written with expm1 so the reference part cancels exactly.
    const double dE = E0 * std::expm1(2.0 * ((beta[i] - alpha[i]) - (beta0[i] - alpha0[i])));
    w[i] = std::exp(-2.0 * alpha0[i]) * (as - a0s) -
           m * std::exp(-2.0 * beta0[i]) * (L[i] * dE + E * bs - E0 * b0s);
  }
  return w;
}

MetricVelocity lie_derivative(const SymmetricMetric& g, std::span<const double> w) {
  const ModelSpace& space = g.space();
  const Stencil st(space);
  const std::size_t n = g.size();
  const std::vector<double> alpha = g.log_lapse();
  const std::vector<double> beta = g.log_warp();
  const auto L = space.reference_log_derivative();
  const std::vector<double> w_s = st.first(w, Parity::Odd);
  const auto a = g.a();
  const auto b = g.b();
  MetricVelocity v;
  v.d_alpha.resize(n);
  v.d_beta.resize(n);
  v.d_a2.resize(n);
  v.d_b2.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (space.is_pole(i)) {
      v.d_alpha[i] = w_s[i];
      v.d_beta[i] = w_s[i];
    } else {
      v.d_alpha[i] = w[i] * st.first<double>(alpha, i, Parity::Even) + w_s[i];
      v.d_beta[i] = w[i] * (L[i] + st.first<double>(beta, i, Parity::Even));
    }
    v.d_a2[i] = 2.0 * a[i] * a[i] * v.d_alpha[i];
    v.d_b2[i] = 2.0 * b[i] * b[i] * v.d_beta[i];
  }
  return v;
}

MetricVelocity dcrf_rhs(const FlowState& state, const SymmetricMetric& g0) {
  MetricVelocity v = crf_rhs(state);
  const MetricVelocity lie =
      lie_derivative(state.metric, deturck_vector_field(state.metric, g0));
  const ModelSpace& space = state.metric.space();
  for (std::size_t i = 0; i < v.d_alpha.size(); ++i) {
    if (is_frozen(space, i)) continue;
    v.d_alpha[i] += lie.d_alpha[i];
    v.d_beta[i] += lie.d_beta[i];
    v.d_a2[i] += lie.d_a2[i];
    v.d_b2[i] += lie.d_b2[i];
  }
  return v;
}

double stable_time_step(const SymmetricMetric& g, double sigma) {
  if (!(sigma > 0.0)) throw InvalidArgument("CFL factor must be positive");
  double min_a2 = std::numeric_limits<double>::infinity();
  for (double a : g.a()) min_a2 = std::min(min_a2, a * a);
  const double ds = g.space().spacing();
  return sigma * ds * ds * min_a2;
}

FlowState step(const FlowState& state, double dt, FlowMode mode, const SymmetricMetric& g0,
               GaugeMap* gauge, const PressureSolveOptions& options) {
  const auto& space_ptr = state.metric.space_ptr();
  const ModelSpace& space = *space_ptr;
  const double c = state.metric.einstein_c();
  const bool with_gauge = gauge != nullptr && mode == FlowMode::Dcrf;
  const std::vector<double> alpha0 = state.metric.log_lapse();
  const std::vector<double> beta0 = state.metric.log_warp();
  const std::vector<double> phi0 = with_gauge ? gauge->phi : std::vector<double>{};

  auto evaluate = [&](const std::vector<double>& alpha, const std::vector<double>& beta,
                      std::span<const double> phi, double t) {
    check_state(space, alpha, beta, 1e300);
    FlowState stage = make_state(SymmetricMetric::from_log(space_ptr, alpha, beta, c), t, options);
    return stage_rates(stage, mode, g0, phi);
  };

  const StageRates k1 = stage_rates(state, mode, g0, phi0);
  const double h = 0.5 * dt;
  const StageRates k2 = evaluate(axpy(alpha0, h, k1.d_alpha), axpy(beta0, h, k1.d_beta),
                                 with_gauge ? axpy(phi0, h, k1.d_phi) : std::vector<double>{},
                                 state.t + h);
  const StageRates k3 = evaluate(axpy(alpha0, h, k2.d_alpha), axpy(beta0, h, k2.d_beta),
                                 with_gauge ? axpy(phi0, h, k2.d_phi) : std::vector<double>{},
                                 state.t + h);
  const StageRates k4 = evaluate(axpy(alpha0, dt, k3.d_alpha), axpy(beta0, dt, k3.d_beta),
                                 with_gauge ? axpy(phi0, dt, k3.d_phi) : std::vector<double>{},
                                 state.t + dt);

  const std::size_t n = alpha0.size();
  std::vector<double> alpha(n), beta(n);
  const double w = dt / 6.0;
  for (std::size_t i = 0; i < n; ++i) {
    alpha[i] = alpha0[i] + w * (k1.d_alpha[i] + 2.0 * k2.d_alpha[i] + 2.0 * k3.d_alpha[i] +
                                k4.d_alpha[i]);
    beta[i] = beta0[i] + w * (k1.d_beta[i] + 2.0 * k2.d_beta[i] + 2.0 * k3.d_beta[i] +
                              k4.d_beta[i]);
  }
  check_state(space, alpha, beta, 1e300);
  FlowState next = make_state(SymmetricMetric::from_log(space_ptr, alpha, beta, c),
                              state.t + dt, options);
  if (with_gauge) {
    std::vector<double> phi(n);
    for (std::size_t i = 0; i < n; ++i) {
      phi[i] = phi0[i] + w * (k1.d_phi[i] + 2.0 * k2.d_phi[i] + 2.0 * k3.d_phi[i] + k4.d_phi[i]);
    }
    check_monotone(phi, next.t);
    gauge->phi = std::move(phi);
    gauge->phi_inverse = invert_monotone(space, gauge->phi);
    gauge->w_field = deturck_vector_field(next.metric, g0);
  }
  return next;
}

Trajectory integrate_flow(const SymmetricMetric& initial, const FlowSettings& settings) {
  if (!(settings.t_end >= 0.0)) throw InvalidArgument("t_end must be nonnegative");
  if (!(settings.snapshot_interval > 0.0)) {
    throw InvalidArgument("snapshot_interval must be positive");
  }
  Trajectory traj;
  traj.mode = settings.mode;
  const SymmetricMetric& g0 = initial;
  const bool dcrf = settings.mode == FlowMode::Dcrf;

  FlowState state = make_state(initial, 0.0, settings.pressure);
  GaugeMap gauge = identity_gauge(initial.space());
  traj.snapshots.push_back(state);
  if (dcrf) traj.gauges.push_back(gauge);

  std::size_t next_index = 1;
  const double first_dt = stable_time_step(initial, settings.cfl_sigma) /
                          (dcrf ? 1.0 : dissipation_cap(initial.m()));
  const double eps = 1e-12 * std::max(1.0, settings.t_end);
  while (state.t < settings.t_end - eps) {
    const double target =
        std::min(settings.t_end, settings.snapshot_interval * static_cast<double>(next_index));
    double dt = stable_time_step(state.metric, settings.cfl_sigma);
    if (!dcrf) dt /= dissipation_cap(initial.m());
    if (!(dt > kMinStepFraction * first_dt)) {
      traj.halt = HaltKind::Degeneration;
      traj.halt_reason = fmt::format("time step collapsed at t = {:.6g} (min a -> 0)", state.t);
      traj.halt_time = state.t;
      break;
    }
    bool landing = false;
    if (state.t + dt >= target - eps) {
      dt = target - state.t;
      landing = true;
    }
    try {
      state = step(state, dt, settings.mode, g0, dcrf ? &gauge : nullptr, settings.pressure);
      const std::vector<double> alpha = state.metric.log_lapse();
      const std::vector<double> beta = state.metric.log_warp();
      check_state(state.metric.space(), alpha, beta, settings.degeneration_bound);
    } catch (const DegenerationError& e) {
      traj.halt = HaltKind::Degeneration;
      traj.halt_reason = e.what();
      traj.halt_time = state.t + dt;
      break;
    } catch (const SolverError& e) {
      traj.halt = HaltKind::Solver;
      traj.halt_reason = e.what();
      traj.halt_time = state.t + dt;
      break;
    }
    ++traj.steps;
    if (landing) {
      state.t = target;
      traj.snapshots.push_back(state);
      if (dcrf) traj.gauges.push_back(gauge);
      if (target >= settings.snapshot_interval * static_cast<double>(next_index) - eps) {
        ++next_index;
      }
    }
  }
  return traj;
}

std::vector<double> sample_field(const ModelSpace& space, std::span<const double> values,
                                 std::span<const double> points) {
  using boost::math::interpolators::cardinal_cubic_b_spline;
  const std::size_t n = space.size();
  const double ds = space.spacing();
  const double extent = space.grid().extent();
  std::vector<double> out(points.size());
  if (space.topology() == Topology::Circle) {
    const std::size_t period = n - 1;
    std::vector<double> padded(3 * period + 1);
    for (std::size_t k = 0; k < padded.size(); ++k) padded[k] = values[k % period];
    cardinal_cubic_b_spline<double> spline(padded.data(), padded.size(), -extent, ds);
    for (std::size_t k = 0; k < points.size(); ++k) {
      out[k] = spline(points[k] - extent * std::floor(points[k] / extent));
    }
    return out;
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double right = space.topology() == Topology::Sphere ? 0.0 : nan;
  cardinal_cubic_b_spline<double> spline(values.data(), n, 0.0, ds, 0.0, right);
  for (std::size_t k = 0; k < points.size(); ++k) {
    out[k] = spline(std::clamp(points[k], 0.0, extent));
  }
  return out;
}

Trajectory gauge_pullback(const Trajectory& dcrf, const SymmetricMetric& g0,
                          const PressureSolveOptions& options) {
  if (dcrf.mode != FlowMode::Dcrf || dcrf.gauges.size() != dcrf.snapshots.size()) {
    throw InvalidArgument("gauge pull-back needs a DCRF trajectory with stored gauge maps");
  }
  Trajectory out;
  out.mode = FlowMode::Crf;
  out.halt = dcrf.halt;
  out.halt_reason = dcrf.halt_reason;
  out.halt_time = dcrf.halt_time;
  out.steps = dcrf.steps;
  out.config_echo = dcrf.config_echo;
  const auto& space_ptr = g0.space_ptr();
  const ModelSpace& space = *space_ptr;
  const Stencil st(space);
  const auto s = space.grid().values();
  const std::size_t n = space.size();
  for (std::size_t k = 0; k < dcrf.snapshots.size(); ++k) {
    const FlowState& snap = dcrf.snapshots[k];
    const std::vector<double>& phi = dcrf.gauges[k].phi;
    check_monotone(phi, snap.t);
    // phi - s is odd about every pole and periodic on the circle.
    std::vector<double> shift(n);
    for (std::size_t i = 0; i < n; ++i) shift[i] = phi[i] - s[i];
    const std::vector<double> shift_s = st.first(shift, Parity::Odd);
    const std::vector<double> alpha_h = snap.metric.log_lapse();
    const std::vector<double> beta_h = snap.metric.log_warp();
    const std::vector<double> alpha_at = sample_field(space, alpha_h, phi);
    const std::vector<double> beta_at = sample_field(space, beta_h, phi);
    std::vector<double> alpha(n), beta(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double phi_s = 1.0 + shift_s[i];
      if (!(phi_s > 0.0)) throw DegenerationError("gauge map derivative is not positive");
      alpha[i] = alpha_at[i] + std::log(phi_s);
      if (space.is_pole(i)) {
        beta[i] = alpha[i];
      } else {
        beta[i] = beta_at[i] +
                  std::log(space.reference_radius_at(phi[i]) / space.reference_radius()[i]);
      }
    }
    out.snapshots.push_back(make_state(
        SymmetricMetric::from_log(space_ptr, alpha, beta, snap.metric.einstein_c()), snap.t,
        options));
  }
  return out;
}

TrustedBand trusted_band(const ModelSpace& space) {
  const std::size_t n = space.size();
  const auto s = space.grid().values();
  const double extent = space.grid().extent();
  auto first_at = [&](double value) {
    std::size_t i = 0;
    while (i < n && s[i] < value - 1e-12) ++i;
    return i;
  };
  auto last_below = [&](double value) {
    std::size_t end = 0;
    while (end < n && s[end] <= value + 1e-12) ++end;
    return end;
  };
  switch (space.topology()) {
    case Topology::Ball: {
      const std::size_t end = last_below(extent - kFarFieldMargin);
      return {std::min(std::max<std::size_t>(3, first_at(kPoleMargin)), end), end};
    }
    case Topology::Sphere: {
      const std::size_t end = std::min(n - 3, last_below(extent - kPoleMargin));
      return {std::min(std::max<std::size_t>(3, first_at(kPoleMargin)), end), end};
    }
    case Topology::Circle:
      return {0, n - 1};
  }
  return {0, n};
}

}  // namespace crf
