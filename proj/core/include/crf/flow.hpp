#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crf/curvature.hpp"
#include "crf/elliptic.hpp"
#include "crf/metric.hpp"

namespace crf {

enum class FlowMode { Crf, Dcrf };

std::string_view to_string(FlowMode mode);

/// Radial diffeomorphism generated by the DeTurck field, with dphi/dt = -W.
/// The sign makes (phi)^* h solve CRF when h solves the gauged flow with the
/// Lie term + L_W h.
struct GaugeMap {
  std::vector<double> phi;
  std::vector<double> phi_inverse;
  std::vector<double> w_field;
};

/// Identity gauge map on the grid of `space`.
GaugeMap identity_gauge(const ModelSpace& space);

/// A coherent (metric, pressure, curvature) triple at time t.
struct FlowState {
  double t = 0.0;
  SymmetricMetric metric;
  PressureField pressure;
  CurvatureBundle curv;
};

/// Computes curvature and solves the pressure equation for g.
FlowState make_state(SymmetricMetric g, double t = 0.0,
                     const PressureSolveOptions& options = {});

/// Metric velocity in log form together with the tensor components it
/// represents: d_a2 = d/dt a^2 = 2 a^2 d_alpha, d_b2 = 2 b^2 d_beta.
struct MetricVelocity {
  std::vector<double> d_alpha;
  std::vector<double> d_beta;
  std::vector<double> d_a2;
  std::vector<double> d_b2;
};

/// -2(Rc - 2c g) - 2 p g componentwise (c = -m/2 on the AH ball). Rates at
/// the truncated AH boundary node are zero: that node is a Dirichlet row.
MetricVelocity crf_rhs(const FlowState& state);

/// Radial component W^s of h0^{ij}(Gamma^k_ij(g) - Gamma^k_ij(g0)).
std::vector<double> deturck_vector_field(const SymmetricMetric& g, const SymmetricMetric& g0);

/// Log-form components of L_W g for a radial field W:
/// (L_W g)_ss / (2 a^2) = W alpha_s + W_s, (L_W g)_tan / (2 b^2) = W (r'/r + beta_s).
MetricVelocity lie_derivative(const SymmetricMetric& g, std::span<const double> w);

/// crf_rhs plus the Lie term along deturck_vector_field(g, g0).
MetricVelocity dcrf_rhs(const FlowState& state, const SymmetricMetric& g0);

/// dt = sigma ds^2 min a^2.
double stable_time_step(const SymmetricMetric& g, double sigma);

/// One classical RK4 step. Every stage re-solves the pressure equation. For
/// DCRF the gauge map is advanced inside the same stages when `gauge` is
/// given. Throws DegenerationError on loss of positivity or non-finite data.
FlowState step(const FlowState& state, double dt, FlowMode mode, const SymmetricMetric& g0,
               GaugeMap* gauge = nullptr, const PressureSolveOptions& options = {});

struct FlowSettings {
  FlowMode mode = FlowMode::Crf;
  double t_end = 0.1;
  double cfl_sigma = 0.2;
  double snapshot_interval = 0.01;
  PressureSolveOptions pressure;
  /// Halt once |log a| or |log(b/r)| exceeds this anywhere.
  double degeneration_bound = 50.0;
};

enum class HaltKind { None, Degeneration, Solver };

struct Trajectory {
  FlowMode mode = FlowMode::Crf;
  std::vector<FlowState> snapshots;
  /// DCRF runs: the gauge map at each snapshot.
  std::vector<GaugeMap> gauges;
  HaltKind halt = HaltKind::None;
  std::string halt_reason;
  double halt_time = 0.0;
  std::size_t steps = 0;
  std::string config_echo;

  bool halted() const { return halt != HaltKind::None; }
};

/// Integrates from `initial` (taken as given; normalization is the caller's
/// job) to settings.t_end, recording snapshots at multiples of
/// snapshot_interval. Degeneration and solver failures halt the run and keep
/// every snapshot recorded before the failure.
Trajectory integrate_flow(const SymmetricMetric& initial, const FlowSettings& settings);

/// Pulls each DCRF snapshot back through its gauge map: a(s) = a_h(phi) phi_s,
/// b(s) = b_h(phi). Throws DegenerationError if phi is not strictly increasing.
Trajectory gauge_pullback(const Trajectory& dcrf, const SymmetricMetric& g0,
                          const PressureSolveOptions& options = {});

/// Samples a nodal field at arbitrary coordinates with a cubic B-spline,
/// honoring pole parity (even) and periodicity. Points are clamped to the grid.
std::vector<double> sample_field(const ModelSpace& space, std::span<const double> values,
                                 std::span<const double> points);

/// Nodes over which diagnostics take suprema: at least kPoleMargin (and three
/// nodes) away from every pole and, on the ball, s <= s_max - kFarFieldMargin.
/// The pole margin keeps the boundary layer of the CRF pole stabilization, a
/// few nodes wide, out of derivative-heavy quantities such as |nabla^2 Rm|.
inline constexpr double kPoleMargin = 0.5;
inline constexpr double kFarFieldMargin = 1.0;

struct TrustedBand {
  std::size_t begin = 0;
  std::size_t end = 0;
};

TrustedBand trusted_band(const ModelSpace& space);

}  // namespace crf
