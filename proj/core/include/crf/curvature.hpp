#pragma once

#include <vector>

#include "crf/metric.hpp"

namespace crf {

/// Curvature of a doubly-warped metric, all in an orthonormal frame.
///
/// k_rad is the sectional curvature of planes containing the radial
/// direction, k_sph that of planes tangent to the fiber. Norms are full
/// (4,0)-tensor norms, so |Rm|^2 = 4m k_rad^2 + 2m(m-1) k_sph^2.
struct CurvatureBundle {
  std::vector<double> k_rad;
  std::vector<double> k_sph;
  std::vector<double> ric_rad;
  std::vector<double> ric_tan;
  std::vector<double> scalar;
  /// Eigenvalues of Rc - 2c g (Rc + m g on the AH ball).
  std::vector<double> einstein_dev_rad;
  std::vector<double> einstein_dev_tan;
  std::vector<double> norm_rm_sq;
  std::vector<double> norm_dev_sq;
  std::vector<double> grad_rm_norm;
};

CurvatureBundle compute_curvature(const SymmetricMetric& g);

/// Only the two sectional curvatures; the hot path of the flow integrator.
void sectional_curvatures(const SymmetricMetric& g, std::vector<double>& k_rad,
                          std::vector<double>& k_sph);

/// b_s / (a b): the rate at which the fiber expands along the unit radial
/// direction. It is the mean curvature of a level set divided by m. Zero at
/// poles, where it is only used multiplied by fields that vanish there.
std::vector<double> warp_rate(const SymmetricMetric& g);

/// |nabla^2 Rm| at every node. The second covariant derivative is obtained
/// by frame-differentiating the coefficient fields of nabla Rm.
std::vector<double> second_gradient_rm_norm(const SymmetricMetric& g,
                                            const CurvatureBundle& curv);

/// Squared full-tensor norm of nabla Rm given the frame data at one point:
/// radial derivatives dk_rad = e_0(k_rad), dk_sph = e_0(k_sph) and the warp rate.
double gradient_rm_norm_sq(int m, double dk_rad, double dk_sph, double warp_rate,
                           double k_rad, double k_sph);

/// Squared norm of nabla^2 Rm in terms of the three coefficient fields
/// c = (e_0 k_rad, e_0 k_sph, h (k_rad - k_sph)), their radial frame
/// derivatives dc = e_0(c), and the warp rate h.
double second_gradient_rm_norm_sq(int m, const double (&c)[3], const double (&dc)[3],
                                  double warp_rate);

}  // namespace crf
