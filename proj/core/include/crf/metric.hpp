#pragma once

#include <memory>
#include <span>
#include <vector>

#include "crf/grid.hpp"

namespace crf {

/// How the radial interval closes up: a ball with a pole at s = 0 and a
/// truncated outer end, a sphere with poles at both ends, or a circle.
enum class Topology { Ball, Sphere, Circle };

/// The fixed part of a symmetry-reduced geometry: grid, fiber dimension,
/// fiber curvature and the space-form reference profile r(s) used to
/// regularize the warping function (b = r e^beta).
///
/// Reference profiles: sinh(s) for the AH ball (sectional curvature -1),
/// R sin(s/R) with R = L/pi for the closed sphere (curvature 1/R^2), and
/// r = 1 on the circle (flat).
class ModelSpace {
 public:
  ModelSpace(Family family, int m, int kappa, double extent, std::size_t n_points);

  const RadialGrid& grid() const { return grid_; }
  Family family() const { return grid_.family(); }
  Topology topology() const { return topology_; }
  int m() const { return m_; }
  int kappa() const { return kappa_; }
  std::size_t size() const { return grid_.size(); }
  double spacing() const { return grid_.spacing(); }

  /// Sectional curvature of the reference space form.
  double reference_curvature() const { return reference_curvature_; }
  /// r(s_i) (zero at poles).
  std::span<const double> reference_radius() const { return radius_; }
  /// r'(s_i)/r(s_i); NaN at poles, where every use goes through a limit.
  std::span<const double> reference_log_derivative() const { return log_derivative_; }
  /// r(s) at an arbitrary coordinate, e.g. a cell face.
  double reference_radius_at(double s) const;

  bool is_pole(std::size_t i) const;
  /// Number of independent nodes; on the circle the last node repeats the first.
  std::size_t independent_size() const;

  bool operator==(const ModelSpace& other) const;

 private:
  RadialGrid grid_;
  Topology topology_;
  int m_;
  int kappa_;
  double reference_curvature_;
  std::vector<double> radius_;
  std::vector<double> log_derivative_;
};

/// Doubly-warped metric g = a(s)^2 ds^2 + b(s)^2 g_kappa on an (m+1)-manifold.
///
/// `einstein_c` fixes the Einstein deviation Rc - 2c g and the preserved
/// scalar curvature 2(m+1)c; the AH ball always uses c = -m/2, giving
/// Rc + m g and -m(m+1).
class SymmetricMetric {
 public:
  SymmetricMetric(std::shared_ptr<const ModelSpace> space, std::vector<double> a,
                  std::vector<double> b, double einstein_c);

  /// Builds a metric from alpha = log a and beta = log(b / r). Pole values
  /// of beta are ignored (regularity forces beta = alpha there).
  static SymmetricMetric from_log(std::shared_ptr<const ModelSpace> space,
                                  std::span<const double> alpha,
                                  std::span<const double> beta, double einstein_c);

  const ModelSpace& space() const { return *space_; }
  const std::shared_ptr<const ModelSpace>& space_ptr() const { return space_; }
  const RadialGrid& grid() const { return space_->grid(); }
  std::size_t size() const { return a_.size(); }
  int m() const { return space_->m(); }
  int kappa() const { return space_->kappa(); }
  Family family() const { return space_->family(); }

  std::span<const double> a() const { return a_; }
  std::span<const double> b() const { return b_; }

  double einstein_c() const { return einstein_c_; }
  double scalar_target() const { return 2.0 * (m() + 1) * einstein_c_; }

  /// log a at every node.
  std::vector<double> log_lapse() const;
  /// log(b / r) at every node, with the pole value set to log a.
  std::vector<double> log_warp() const;

  SymmetricMetric with_einstein_c(double c) const;

 private:
  std::shared_ptr<const ModelSpace> space_;
  std::vector<double> a_;
  std::vector<double> b_;
  double einstein_c_;
};

/// Maximum pole-regularity defect |b_s / a| - 1 over the pole nodes, using a
/// second-order one-sided difference. Zero when the grid has no poles.
double pole_regularity_defect(const SymmetricMetric& g);

struct BackgroundParams {
  Family family = Family::AhBall;
  int m = 3;
  int kappa = 1;
  /// s_max for the ball, L for closed families.
  double extent = 8.0;
  std::size_t n_points = 401;
};

/// Reference metric for a family: hyperbolic space (a = 1, b = sinh s), the
/// round sphere of radius L/pi (b = R sin(s/R)), or the flat product on a
/// circle (b = 1).
SymmetricMetric build_background(const BackgroundParams& params);

}  // namespace crf
