#pragma once

#include <optional>
#include <span>
#include <vector>

#include "crf/metric.hpp"

namespace crf {

/// max over nodes [begin, end) of e^{mu s} |field(s)|: the discrete
/// x^{-mu}-weighted sup-norm with x = e^{-s}.
double weighted_sup_norm(std::span<const double> field, double mu, const RadialGrid& grid,
                         std::size_t begin = 0,
                         std::size_t end = static_cast<std::size_t>(-1));

/// Least-squares slope of -log|field| against s over [s_lo, s_hi], i.e. mu
/// with field ~ x^mu. Empty when the field vanishes or changes sign on the
/// window, or the window holds fewer than two nodes.
std::optional<double> decay_rate_fit(std::span<const double> field, const RadialGrid& grid,
                                     double s_lo, double s_hi);

struct TTensorReport {
  /// |T| proxy per node: 2 |d_x log(x b)| in the geodesic compactification.
  /// The radial components vanish identically in that gauge.
  std::vector<double> t_sup_per_slice;
  /// Signed value extrapolated linearly in x to the boundary.
  double boundary_limit = 0.0;
  double tolerance = 0.0;
  bool totally_geodesic = false;
};

/// Compactifies with the geodesic defining function x = e^{-rho},
/// rho(s) = s - int_s^{s_max} (a - 1), so x^2 g = dx^2 + (x b)^2 g_kappa, and
/// evaluates the fiber part of T, which is 2 (1 - h)/x with h = b_s/(a b).
/// The boundary limit is a quadratic fit in x over s in [s_max - 3, s_max - 1]. A negative
/// tolerance selects the default 10 ds^2.
TTensorReport t_tensor_report(const SymmetricMetric& g, double tolerance = -1.0);

/// Verdict on whether sqrt(|Rc + m g|^2) lies in x^2 C at desk scale.
struct DecayMembership {
  bool member = false;
  /// Weighted sup over the outer window divided by that over the inner one;
  /// about e^{1.5} for an O(x) deviation, at most about 1 for O(x^2).
  double growth_ratio = 0.0;
  /// Relative growth of the weighted sup from the coarsest to the finest grid
  /// (negative when it shrinks).
  double grid_variation = 0.0;
  /// Weighted sup (mu = 2) over the far field on the finest grid.
  double weighted_sup = 0.0;
};

inline constexpr double kGrowthRatioThreshold = 2.0;
inline constexpr double kGridVariationThreshold = 0.1;

/// Evaluates the x^2 membership of the Einstein deviation on one or more
/// discretizations of the same metric (coarse first). Windows are
/// [s_max - 4, s_max - 2.5] and [s_max - 2.5, s_max - 1]. The deviation is a
/// member when its weighted sup neither grows toward the boundary nor under
/// refinement, or when it is pure discretization error (halving or better
/// under refinement).
DecayMembership einstein_decay_membership(std::span<const SymmetricMetric> ladder);

}  // namespace crf
