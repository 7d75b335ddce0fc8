#pragma once

#include <vector>

#include "crf/metric.hpp"

namespace crf {

struct ConformalOptions {
  /// Target sup-norm of R + m(m+1) over the solved nodes.
  double tolerance = 1e-10;
  int max_iterations = 50;
};

/// Result of the Yamabe-type normalization g~ = w^{4/(m-1)} g.
struct ConformalResult {
  SymmetricMetric metric;
  std::vector<double> w;
  int iterations = 0;
  /// sup |R(g~) + m(m+1)| over every node except the Dirichlet node s_max.
  double residual = 0.0;
};

/// Conformally deforms AH data to constant scalar curvature -m(m+1).
///
/// Writes w^{4/(m-1)} = e^{2u} and solves the discrete equation
/// R(e^{2u} g) = -m(m+1) for u with damped Newton (step halving), u = 0 at
/// s_max (w = 1 at the truncated boundary) and even parity at the pole. The
/// residual is evaluated with the same stencils compute_curvature uses, so the
/// returned metric has constant computed scalar curvature. Throws SolverError
/// when Newton fails to converge and InvalidArgument for closed families.
ConformalResult conformal_normalize(const SymmetricMetric& g,
                                    const ConformalOptions& options = {});

}  // namespace crf
