#include "crf/asymptotics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "crf/curvature.hpp"
#include "crf/errors.hpp"
#include "crf/stencil.hpp"

namespace crf {

double weighted_sup_norm(std::span<const double> field, double mu, const RadialGrid& grid,
                         std::size_t begin, std::size_t end) {
  if (field.size() != grid.size()) throw InvalidArgument("field does not match the grid");
  end = std::min(end, field.size());
  double best = 0.0;
  for (std::size_t i = begin; i < end; ++i) {
    if (!std::isfinite(field[i])) throw DegenerationError("non-finite value in weighted norm");
    best = std::max(best, std::exp(mu * grid[i]) * std::abs(field[i]));
  }
  return best;
}

std::optional<double> decay_rate_fit(std::span<const double> field, const RadialGrid& grid,
                                     double s_lo, double s_hi) {
  if (field.size() != grid.size()) throw InvalidArgument("field does not match the grid");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t count = 0;
  int sign = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double s = grid[i];
    if (s < s_lo || s > s_hi) continue;
    const double v = field[i];
    if (!std::isfinite(v) || v == 0.0) return std::nullopt;
    const int here = v > 0.0 ? 1 : -1;
    if (sign != 0 && here != sign) return std::nullopt;
    sign = here;
    const double y = -std::log(std::abs(v));
    sx += s;
    sy += y;
    sxx += s * s;
    sxy += s * y;
    ++count;
  }
  if (count < 2) return std::nullopt;
  const double n = static_cast<double>(count);
  const double denom = n * sxx - sx * sx;
  if (denom <= 0.0) return std::nullopt;
  return (n * sxy - sx * sy) / denom;
}

TTensorReport t_tensor_report(const SymmetricMetric& g, double tolerance) {
  if (g.family() != Family::AhBall) {
    throw InvalidArgument("the T-tensor needs a conformal boundary (AH_BALL only)");
  }
  const auto& grid = g.grid();
  const std::size_t n = g.size();
  const double ds = grid.spacing();
  const double s_max = grid.extent();
  const Stencil st(g.space());
  const std::vector<double> alpha = g.log_lapse();
  const std::vector<double> beta = g.log_warp();
  const auto a = g.a();

  // rho(s_i) = s_i - int_{s_i}^{s_max} (a - 1) by the trapezoid rule.
  std::vector<double> rho(n);
  double tail = 0.0;
  rho[n - 1] = s_max;
  for (std::size_t i = n - 1; i-- > 0;) {
    tail += 0.5 * ds * ((a[i] - 1.0) + (a[i + 1] - 1.0));
    rho[i] = grid[i] - tail;
  }

  TTensorReport report;
  report.tolerance = tolerance < 0.0 ? 10.0 * ds * ds : tolerance;
  report.t_sup_per_slice.assign(n, 0.0);
  std::vector<double> signed_t(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    const double s = grid[i];
    const double ea = std::exp(-alpha[i]);
    const double beta_s = st.first<double>(beta, i, Parity::Even);
    // 1 - h with h = e^{-alpha}(coth s + beta_s), free of cancellation.
    const double one_minus_h = -std::expm1(-alpha[i]) - ea * 2.0 / std::expm1(2.0 * s) -
                               ea * beta_s;
    signed_t[i] = 2.0 * one_minus_h * std::exp(rho[i]);
    report.t_sup_per_slice[i] = std::abs(signed_t[i]);
  }

  // Least-squares quadratic in x over the window; x is scaled by its largest
  // value so the normal equations stay well conditioned.
  std::vector<double> xs, ts;
  for (std::size_t i = 1; i < n; ++i) {
    const double s = grid[i];
    if (s < s_max - 3.0 || s > s_max - 1.0) continue;
    xs.push_back(std::exp(-rho[i]));
    ts.push_back(signed_t[i]);
  }
  if (xs.size() < 3) throw InvalidArgument("grid too short for a T-tensor boundary fit");
  const double x_scale = *std::max_element(xs.begin(), xs.end());
  std::array<std::array<double, 4>, 3> normal{};
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double u = xs[k] / x_scale;
    const std::array<double, 3> basis{1.0, u, u * u};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) normal[r][c] += basis[r] * basis[c];
      normal[r][3] += basis[r] * ts[k];
    }
  }
  for (int col = 0; col < 3; ++col) {
    for (int r = col + 1; r < 3; ++r) {
      const double f = normal[r][col] / normal[col][col];
      for (int c = col; c < 4; ++c) normal[r][c] -= f * normal[col][c];
    }
  }
  std::array<double, 3> coef{};
  for (int r = 2; r >= 0; --r) {
    double v = normal[r][3];
    for (int c = r + 1; c < 3; ++c) v -= normal[r][c] * coef[c];
    coef[r] = v / normal[r][r];
  }
  report.boundary_limit = coef[0];
  report.totally_geodesic = std::abs(report.boundary_limit) <= report.tolerance;
  return report;
}

namespace {

struct WindowSups {
  double inner = 0.0;
  double outer = 0.0;
};

WindowSups weighted_windows(const SymmetricMetric& g) {
  const auto& grid = g.grid();
  const double s_max = grid.extent();
  const CurvatureBundle curv = compute_curvature(g);
  std::vector<double> dev(g.size());
  for (std::size_t i = 0; i < dev.size(); ++i) dev[i] = std::sqrt(curv.norm_dev_sq[i]);
  const std::size_t i0 = grid.index_at_or_above(s_max - 4.0);
  const std::size_t i1 = grid.index_at_or_above(s_max - 2.5);
  const std::size_t i2 = grid.index_at_or_above(s_max - 1.0) + 1;
  return {weighted_sup_norm(dev, 2.0, grid, i0, i1), weighted_sup_norm(dev, 2.0, grid, i1, i2)};
}

}  // namespace

DecayMembership einstein_decay_membership(std::span<const SymmetricMetric> ladder) {
  if (ladder.empty()) throw InvalidArgument("membership needs at least one metric");
  if (ladder.front().family() != Family::AhBall) {
    throw InvalidArgument("decay membership is defined for AH_BALL metrics only");
  }
  DecayMembership out;
  std::vector<WindowSups> sups;
  for (const auto& g : ladder) sups.push_back(weighted_windows(g));
  const WindowSups& fine = sups.back();
  const WindowSups& coarse = sups.front();
  out.weighted_sup = std::max(fine.inner, fine.outer);
  constexpr double kFloor = 1e-12;
  if (out.weighted_sup <= kFloor) {
    out.member = true;
    return out;
  }
  out.growth_ratio = fine.inner > kFloor ? fine.outer / fine.inner
                                         : std::numeric_limits<double>::infinity();
  const double coarse_sup = std::max(coarse.inner, coarse.outer);
  out.grid_variation = coarse_sup > kFloor ? out.weighted_sup / coarse_sup - 1.0 : 0.0;
  const bool vanishing = sups.size() > 1 && out.grid_variation <= -0.5;
  out.member = vanishing || (out.growth_ratio <= kGrowthRatioThreshold &&
                             out.grid_variation <= kGridVariationThreshold);
  return out;
}

}  // namespace crf
