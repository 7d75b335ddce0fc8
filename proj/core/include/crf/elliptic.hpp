#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "crf/curvature.hpp"
#include "crf/metric.hpp"
#include "crf/tridiagonal.hpp"

namespace crf {

enum class BoundaryRow {
  PoleNeumann,  ///< regularity p_s = 0 through an even ghost value
  Dirichlet,    ///< p = 0 at the truncated conformal infinity
  Periodic,
};

/// Discretized pressure operator.
///
/// AH ball: -Delta_g + (m+1). Closed: (n-1) Delta_g + 2nc with n = m+1.
/// Delta_g p = (1/(a b^m)) d_s((b^m/a) d_s p) in divergence form.
struct EllipticOperator {
  TridiagonalMatrix matrix;
  double laplacian_scale = -1.0;
  double shift = 0.0;
  BoundaryRow bc_inner = BoundaryRow::PoleNeumann;
  BoundaryRow bc_outer = BoundaryRow::Dirichlet;

  /// Closed families only: smallest singular value below 1e-8 times the
  /// operator norm. Solving is refused in that case.
  bool near_singular = false;
  double singular_ratio = 1.0;
  std::vector<double> near_kernel;

  /// Geometry needed to turn p into frame derivatives.
  std::shared_ptr<const ModelSpace> space;
  std::vector<double> lapse;

  std::size_t unknowns() const { return matrix.size(); }
  std::vector<double> sub() const { return matrix.sub; }
  std::vector<double> diag() const { return matrix.diag; }
  std::vector<double> sup() const { return matrix.sup; }

  /// Applies the operator to a nodal field (the repeated circle node included).
  std::vector<double> apply(std::span<const double> p) const;
};

inline constexpr double kSingularRatioThreshold = 1e-8;

/// Builds the operator for g. For closed families it also runs the spectral
/// guard; see EllipticOperator::near_singular.
EllipticOperator assemble_operator(const SymmetricMetric& g);

/// Right-hand side of the pressure equation: |Rc + m g|^2 / m on the AH ball
/// and -|Rc - 2c g|^2 on closed families.
std::vector<double> pressure_source(const CurvatureBundle& curv, Family family, int m);

/// Pressure with its iterated radial frame derivatives e_0^k p, e_0 = a^{-1} d_s.
struct PressureField {
  std::vector<double> p;
  std::vector<double> dp;
  std::vector<double> d2p;
  std::vector<double> d3p;
  /// Relative sup-norm residual of the discrete system.
  double solve_residual = 0.0;
};

struct PressureSolveOptions {
  double tolerance = 1e-9;
  /// A source whose sup-norm is below this is treated as identically zero;
  /// p = 0 is then returned even on a near-singular operator.
  double zero_source = 1e-12;
};

PressureField solve_pressure(const EllipticOperator& op, std::span<const double> source,
                             const PressureSolveOptions& options = {});

/// e_0 p, e_0^2 p, e_0^3 p of an already known pressure profile.
void pressure_frame_derivatives(const SymmetricMetric& g, PressureField& field);

struct PressureBoundsReport {
  bool within = false;
  /// sup |p|, sup |e_0 p|, sup |e_0^2 p|, sup |e_0^3 p|.
  std::array<double, 4> suprema{};
};

/// Checks max_i sup|nabla^i p| <= k_tilde over nodes [begin, end).
PressureBoundsReport verify_pressure_bounds(const PressureField& p, double k_tilde,
                                            std::size_t begin = 0,
                                            std::size_t end = static_cast<std::size_t>(-1));

}  // namespace crf
