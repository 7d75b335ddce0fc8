#include "doctest.h"

#include <cmath>
#include <numbers>

#include "coordinate_oracle.hpp"
#include "crf/errors.hpp"
#include "crf/flow.hpp"
#include "fixtures.hpp"

using namespace crf;

namespace {

double metric_distance(const SymmetricMetric& x, const SymmetricMetric& y) {
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    worst = std::max(worst, std::abs(x.a()[i] - y.a()[i]) / y.a()[i]);
    if (y.b()[i] > 0.0) worst = std::max(worst, std::abs(x.b()[i] - y.b()[i]) / y.b()[i]);
  }
  return worst;
}

SymmetricMetric sech_perturbed(int m, double s_max, std::size_t n, double amplitude) {
  Perturbation p;
  p.amplitude = amplitude;
  return perturb(fixture::hyperbolic(m, s_max, n), p);
}

}  // namespace

TEST_CASE("Einstein states are stationary") {
  SUBCASE("hyperbolic space, CRF and DCRF") {
    const auto g = fixture::hyperbolic(3, 8.0, 201);
    const auto state = make_state(g);
    const auto v = crf_rhs(state);
    CHECK(fixture::sup_abs(v.d_alpha) <= 1e-10);
    CHECK(fixture::sup_abs(v.d_beta) <= 1e-10);
    const auto vd = dcrf_rhs(state, g);
    CHECK(fixture::sup_abs(vd.d_alpha) <= 1e-10);
    for (FlowMode mode : {FlowMode::Crf, FlowMode::Dcrf}) {
      FlowState s = state;
      GaugeMap gauge = identity_gauge(g.space());
      const double dt = stable_time_step(g, 0.2);
      for (int k = 0; k < 10; ++k) s = step(s, dt, mode, g, mode == FlowMode::Dcrf ? &gauge : nullptr);
      CHECK(metric_distance(s.metric, g) <= 1e-10 * 10 * dt + 1e-14);
      CHECK(fixture::sup_diff(gauge.phi, identity_gauge(g.space()).phi) == 0.0);
    }
  }
  SUBCASE("round sphere at c = (n - 1) / 2") {
    const auto g = build_background({Family::Closed, 2, 1, std::numbers::pi, 201}).with_einstein_c(1.0);
    const auto state = make_state(g);
    CHECK(fixture::sup_abs(state.pressure.p) == 0.0);
    const auto v = crf_rhs(state);
    CHECK(fixture::sup_abs(v.d_alpha) <= 1e-10);
    CHECK(fixture::sup_abs(v.d_beta) <= 1e-10);
  }
}

TEST_CASE("DeTurck field against coordinate Christoffel symbols") {
  // Quadratic log profiles make the grid differences exact, so the only
  // remaining difference is roundoff and the oracle's own truncation.
  const int m = 3;
  const auto sp = fixture::space(Family::AhBall, m, 1, 3.0, 301);
  auto a = [](double s) { return std::exp(0.01 * s * s); };
  auto b = [](double s) { return std::sinh(s) * std::exp(0.01 * s * s - 0.02 * s * s); };
  auto a0 = [](double) { return 1.0; };
  auto b0 = [](double s) { return std::sinh(s); };
  const auto g = fixture::sample(sp, a, b, -1.5);
  const auto g0 = fixture::sample(sp, a0, b0, -1.5);
  const auto w = deturck_vector_field(g, g0);
  oracle::CoordinateMetric h(m, 1, a, b), h0(m, 1, a0, b0);
  h.step = h0.step = 0.05;
  for (double s : {0.5, 1.0, 1.7, 2.5}) {
    const std::size_t i = sp->grid().index_at_or_above(s - 1e-12);
    CHECK(w[i] == doctest::Approx(oracle::deturck_radial(h, h0, h.point(s))).epsilon(1e-10));
  }
  CHECK(w[0] == 0.0);

  SUBCASE("identical metrics") {
    CHECK(fixture::sup_abs(deturck_vector_field(g, g)) == 0.0);
  }
  SUBCASE("constant rescaling of the lapse") {
    // a -> 1.1 a leaves d log a alone but rescales the tangential term.
    auto a1 = [](double) { return 1.1; };
    const auto w1 = deturck_vector_field(fixture::sample(sp, a1, b0, -1.5), g0);
    oracle::CoordinateMetric h1(m, 1, a1, b0);
    for (double s : {0.5, 1.5}) {
      const std::size_t i = sp->grid().index_at_or_above(s - 1e-12);
      const double expected = oracle::deturck_radial(h1, h0, h1.point(s));
      CHECK(std::abs(expected) > 0.1);
      CHECK(w1[i] == doctest::Approx(expected).epsilon(1e-9));
    }
  }
  SUBCASE("grid mismatch") {
    CHECK_THROWS_AS(deturck_vector_field(g, fixture::hyperbolic(m, 3.0, 201)), InvalidArgument);
  }
}

TEST_CASE("Lie derivative matches the pull-back derivative") {
  // (phi_eps)^* g with phi_eps(s) = s + eps W(s), differentiated in eps.
  const int m = 3;
  const std::size_t n = 2001;
  const auto sp = fixture::space(Family::AhBall, m, 1, 5.0, n);
  auto a = [](double s) { return 1.0 + 0.05 * std::pow(std::tanh(s), 2); };
  auto b = [](double s) { return std::sinh(s) * (1.0 + 0.03 * std::pow(std::tanh(s), 2)); };
  auto W = [](double s) { return 0.3 * std::sin(s) * std::exp(-0.2 * s * s); };
  const auto g = fixture::sample(sp, a, b, -1.5);
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = W(sp->grid()[i]);
  const auto lie = lie_derivative(g, w);
  const double eps = 1e-5, h = 1e-6;
  for (std::size_t i = 100; i + 100 < n; i += 50) {
    const double s = sp->grid()[i];
    auto pulled = [&](double e) {
      const double phi = s + e * W(s);
      const double phi_s = 1.0 + e * (W(s + h) - W(s - h)) / (2 * h);
      return std::pair{a(phi) * phi_s, b(phi)};
    };
    const auto [ap, bp] = pulled(eps);
    const auto [am, bm] = pulled(-eps);
    const double d_log_a = (std::log(ap) - std::log(am)) / (2 * eps);
    const double d_log_b = (std::log(bp) - std::log(bm)) / (2 * eps);
    CHECK(lie.d_alpha[i] == doctest::Approx(d_log_a).epsilon(1e-5).scale(1.0));
    CHECK(lie.d_beta[i] == doctest::Approx(d_log_b).epsilon(1e-5).scale(1.0));
    CHECK(lie.d_a2[i] == doctest::Approx(2 * a(s) * a(s) * lie.d_alpha[i]));
  }
}

TEST_CASE("dcrf_rhs is crf_rhs plus the Lie term") {
  const auto g0 = fixture::hyperbolic(3, 8.0, 201);
  const auto g = sech_perturbed(3, 8.0, 201, 0.01);
  const auto state = make_state(g);
  const auto crf = crf_rhs(state);
  const auto dcrf = dcrf_rhs(state, g0);
  const auto lie = lie_derivative(g, deturck_vector_field(g, g0));
  for (std::size_t i = 0; i + 1 < g.size(); ++i) {
    CHECK(dcrf.d_alpha[i] == crf.d_alpha[i] + lie.d_alpha[i]);
    CHECK(dcrf.d_beta[i] == crf.d_beta[i] + lie.d_beta[i]);
  }
  // The truncated boundary node is a Dirichlet row in both modes.
  CHECK(dcrf.d_alpha.back() == 0.0);
  CHECK(crf.d_beta.back() == 0.0);
}

TEST_CASE("RK4 step order and time reversal") {
  const auto g = sech_perturbed(3, 8.0, 101, 0.01);
  const auto state = make_state(g);
  const double base = stable_time_step(g, 0.2);
  auto local_error = [&](double dt) {
    const auto one = step(state, dt, FlowMode::Dcrf, g);
    const auto two = step(step(state, dt / 2, FlowMode::Dcrf, g), dt / 2, FlowMode::Dcrf, g);
    return metric_distance(one.metric, two.metric);
  };
  auto reversal_error = [&](double dt) {
    const auto there = step(state, dt, FlowMode::Crf, g);
    const auto back = step(there, -dt, FlowMode::Crf, g);
    return metric_distance(back.metric, g);
  };
  const double e1 = local_error(base), e2 = local_error(base / 2);
  CHECK(std::log2(e1 / e2) >= 4.5);
  const double r1 = reversal_error(base), r2 = reversal_error(base / 2);
  CHECK(r1 <= 0.1 * metric_distance(step(state, base, FlowMode::Crf, g).metric, g));
  CHECK(std::log2(r1 / r2) >= 4.5);
}

TEST_CASE("gauge pull-back") {
  SUBCASE("identity maps return the input") {
    const auto g = sech_perturbed(3, 8.0, 201, 0.01);
    Trajectory traj;
    traj.mode = FlowMode::Dcrf;
    traj.snapshots = {make_state(g, 0.0), make_state(g, 0.1)};
    traj.gauges = {identity_gauge(g.space()), identity_gauge(g.space())};
    const auto out = gauge_pullback(traj, fixture::hyperbolic(3, 8.0, 201));
    REQUIRE(out.snapshots.size() == 2);
    for (const auto& snap : out.snapshots) CHECK(metric_distance(snap.metric, g) <= 1e-13);
  }
  SUBCASE("hyperbolic DCRF run is its own pull-back") {
    const auto g = fixture::hyperbolic(3, 8.0, 101);
    FlowSettings settings;
    settings.mode = FlowMode::Dcrf;
    settings.t_end = 0.02;
    const auto traj = integrate_flow(g, settings);
    const auto out = gauge_pullback(traj, g);
    for (const auto& snap : out.snapshots) CHECK(metric_distance(snap.metric, g) <= 1e-12);
  }
  SUBCASE("non-monotone maps are rejected") {
    const auto g = fixture::hyperbolic(3, 8.0, 101);
    Trajectory traj;
    traj.mode = FlowMode::Dcrf;
    traj.snapshots = {make_state(g)};
    traj.gauges = {identity_gauge(g.space())};
    std::swap(traj.gauges[0].phi[10], traj.gauges[0].phi[11]);
    CHECK_THROWS_AS(gauge_pullback(traj, g), DegenerationError);
    traj.mode = FlowMode::Crf;
    CHECK_THROWS_AS(gauge_pullback(traj, g), InvalidArgument);
  }
  SUBCASE("scalar curvature is carried along the map") {
    const auto g0 = fixture::hyperbolic(3, 8.0, 401);
    FlowSettings settings;
    settings.mode = FlowMode::Dcrf;
    settings.t_end = 0.02;
    settings.snapshot_interval = 0.02;
    const auto traj = integrate_flow(sech_perturbed(3, 8.0, 401, 0.01), settings);
    const auto out = gauge_pullback(traj, g0);
    const auto& phi = traj.gauges.back().phi;
    CHECK(fixture::sup_diff(phi, identity_gauge(g0.space()).phi) > 1e-6);
    const auto r_h = sample_field(g0.space(), traj.snapshots.back().curv.scalar, phi);
    const auto band = trusted_band(g0.space());
    CHECK(fixture::sup_diff(out.snapshots.back().curv.scalar, r_h, band.begin, band.end) <= 1e-3);
  }
}

TEST_CASE("cubic spline sampling") {
  const auto sp = fixture::space(Family::AhBall, 3, 1, 8.0, 401);
  std::vector<double> f(sp->size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::cos(sp->grid()[i]);
  const auto at_nodes = sample_field(*sp, f, sp->grid().values());
  CHECK(fixture::sup_diff(at_nodes, f) <= 1e-13);
  std::vector<double> mid, exact;
  // The outer end takes an estimated end slope; stay inside s <= 7.
  for (std::size_t i = 0; sp->grid()[i] < 7.0; ++i) {
    mid.push_back(sp->grid()[i] + 0.37 * sp->spacing());
    exact.push_back(std::cos(mid.back()));
  }
  CHECK(fixture::sup_diff(sample_field(*sp, f, mid), exact) <= 1e-7);

  const auto circle = fixture::space(Family::Closed, 3, 0, 2.0, 201);
  std::vector<double> wave(circle->size());
  for (std::size_t i = 0; i < wave.size(); ++i) wave[i] = std::sin(std::numbers::pi * circle->grid()[i]);
  const std::vector<double> wrapped = {2.0 + 0.25, -0.25};
  const auto v = sample_field(*circle, wave, wrapped);
  CHECK(v[0] == doctest::Approx(std::sin(std::numbers::pi * 0.25)).epsilon(1e-6));
  CHECK(v[1] == doctest::Approx(std::sin(-std::numbers::pi * 0.25)).epsilon(1e-6));
}

TEST_CASE("integration is deterministic") {
  FlowSettings settings;
  settings.t_end = 0.01;
  settings.snapshot_interval = 0.005;
  const auto g = sech_perturbed(3, 8.0, 201, 0.01);
  const auto x = integrate_flow(g, settings);
  const auto y = integrate_flow(g, settings);
  REQUIRE(x.snapshots.size() == 3);
  REQUIRE(y.snapshots.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(x.snapshots[k].t == y.snapshots[k].t);
    for (std::size_t i = 0; i < g.size(); ++i) {
      CHECK(x.snapshots[k].metric.a()[i] == y.snapshots[k].metric.a()[i]);
      CHECK(x.snapshots[k].metric.b()[i] == y.snapshots[k].metric.b()[i]);
    }
  }
  CHECK(x.snapshots[1].t == doctest::Approx(0.005).epsilon(1e-14));
}

TEST_CASE("scalar-curvature defect relaxes") {
  // rho = R + m(m+1) solves d_t rho = Delta rho - 2 (m - p) rho, so
  // sup |rho(t)| <= sup |rho(0)| exp(-2 (m - sup p) t).
  const int m = 3;
  const auto g = sech_perturbed(m, 8.0, 201, 0.01);
  FlowSettings settings;
  settings.t_end = 0.05;
  settings.snapshot_interval = 0.025;
  const auto traj = integrate_flow(g, settings);
  REQUIRE_FALSE(traj.halted());
  const auto band = trusted_band(g.space());
  auto rho_sup = [&](const FlowState& s) {
    double worst = 0.0;
    for (std::size_t i = band.begin; i < band.end; ++i) worst = std::max(worst, std::abs(s.curv.scalar[i] + m * (m + 1.0)));
    return worst;
  };
  double p_sup = 0.0;
  for (const auto& s : traj.snapshots) p_sup = std::max(p_sup, fixture::sup_abs(s.pressure.p));
  const double rho0 = rho_sup(traj.snapshots.front());
  CHECK(rho0 > 1e-3);
  for (const auto& s : traj.snapshots) {
    CHECK(rho_sup(s) <= rho0 * std::exp(-2.0 * (m - p_sup) * s.t) * 1.01);
  }
}

TEST_CASE("trusted band") {
  const auto ball = fixture::space(Family::AhBall, 3, 1, 8.0, 401);
  const auto band = trusted_band(*ball);
  CHECK(ball->grid()[band.begin] == doctest::Approx(kPoleMargin));
  CHECK(ball->grid()[band.end - 1] == doctest::Approx(8.0 - kFarFieldMargin));
  const auto circle = fixture::space(Family::Closed, 3, 0, 2.0, 101);
  CHECK(trusted_band(*circle).begin == 0);
  CHECK(trusted_band(*circle).end == 100);
}

TEST_CASE("time step rule") {
  const auto g = fixture::hyperbolic(3, 8.0, 401);
  CHECK(stable_time_step(g, 0.2) == doctest::Approx(0.2 * 0.02 * 0.02));
  CHECK_THROWS_AS(stable_time_step(g, 0.0), InvalidArgument);
}
