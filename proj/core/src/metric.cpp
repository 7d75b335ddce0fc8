#include "crf/metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "crf/errors.hpp"

namespace crf {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Topology topology_for(Family family, int kappa) {
  if (family == Family::AhBall) {
    if (kappa != 1) throw InvalidArgument("AH_BALL requires kappa = 1");
    return Topology::Ball;
  }
  if (kappa == 1) return Topology::Sphere;
  if (kappa == 0) return Topology::Circle;
  throw InvalidArgument("kappa must be 0 or 1, got " + std::to_string(kappa));
}

}  // namespace

ModelSpace::ModelSpace(Family family, int m, int kappa, double extent, std::size_t n_points)
    : grid_(family, extent, n_points),
      topology_(topology_for(family, kappa)),
      m_(m),
      kappa_(kappa),
      reference_curvature_(0.0) {
  if (m < 2) throw InvalidArgument("fiber dimension m must be >= 2");
  const std::size_t n = grid_.size();
  radius_.assign(n, 0.0);
  log_derivative_.assign(n, kNaN);
  switch (topology_) {
    case Topology::Ball:
      reference_curvature_ = -1.0;
      for (std::size_t i = 1; i < n; ++i) {
        const double s = grid_[i];
        radius_[i] = std::sinh(s);
        log_derivative_[i] = 1.0 / std::tanh(s);
      }
      break;
    case Topology::Sphere: {
      const double R = grid_.extent() / std::numbers::pi;
      reference_curvature_ = 1.0 / (R * R);
      for (std::size_t i = 1; i + 1 < n; ++i) {
        const double theta = grid_[i] / R;
        radius_[i] = R * std::sin(theta);
        log_derivative_[i] = 1.0 / (R * std::tan(theta));
      }
      break;
    }
    case Topology::Circle:
      for (std::size_t i = 0; i < n; ++i) {
        radius_[i] = 1.0;
        log_derivative_[i] = 0.0;
      }
      break;
  }
}

double ModelSpace::reference_radius_at(double s) const {
  switch (topology_) {
    case Topology::Ball:
      return std::sinh(s);
    case Topology::Sphere: {
      const double R = grid_.extent() / std::numbers::pi;
      return R * std::sin(s / R);
    }
    case Topology::Circle:
      return 1.0;
  }
  return 1.0;
}

bool ModelSpace::is_pole(std::size_t i) const {
  switch (topology_) {
    case Topology::Ball:
      return i == 0;
    case Topology::Sphere:
      return i == 0 || i + 1 == grid_.size();
    case Topology::Circle:
      return false;
  }
  return false;
}

std::size_t ModelSpace::independent_size() const {
  return topology_ == Topology::Circle ? grid_.size() - 1 : grid_.size();
}

bool ModelSpace::operator==(const ModelSpace& other) const {
  return grid_ == other.grid_ && m_ == other.m_ && kappa_ == other.kappa_;
}

SymmetricMetric::SymmetricMetric(std::shared_ptr<const ModelSpace> space, std::vector<double> a,
                                 std::vector<double> b, double einstein_c)
    : space_(std::move(space)), a_(std::move(a)), b_(std::move(b)), einstein_c_(einstein_c) {
  if (!space_) throw InvalidArgument("metric needs a model space");
  const std::size_t n = space_->size();
  if (a_.size() != n || b_.size() != n) {
    throw InvalidArgument("metric profiles do not match the grid size");
  }
  double b_scale = 1.0;
  for (double v : b_) b_scale = std::max(b_scale, std::abs(v));
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(a_[i]) || !(a_[i] > 0.0)) {
      throw DegenerationError("lapse a is not positive at s = " +
                              std::to_string(space_->grid()[i]));
    }
    if (space_->is_pole(i)) {
      if (std::abs(b_[i]) > 1e-12 * b_scale) {
        throw InvalidArgument("warping b must vanish at a pole");
      }
      b_[i] = 0.0;
    } else if (!std::isfinite(b_[i]) || !(b_[i] > 0.0)) {
      throw DegenerationError("warping b is not positive at interior s = " +
                              std::to_string(space_->grid()[i]));
    }
  }
  if (space_->topology() == Topology::Circle) {
    a_.back() = a_.front();
    b_.back() = b_.front();
  }
}

SymmetricMetric SymmetricMetric::from_log(std::shared_ptr<const ModelSpace> space,
                                          std::span<const double> alpha,
                                          std::span<const double> beta, double einstein_c) {
  const std::size_t n = space->size();
  if (alpha.size() != n || beta.size() != n) {
    throw InvalidArgument("log profiles do not match the grid size");
  }
  std::vector<double> a(n), b(n);
  const auto r = space->reference_radius();
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = std::exp(alpha[i]);
    b[i] = space->is_pole(i) ? 0.0 : r[i] * std::exp(beta[i]);
  }
  return SymmetricMetric(std::move(space), std::move(a), std::move(b), einstein_c);
}

std::vector<double> SymmetricMetric::log_lapse() const {
  std::vector<double> out(a_.size());
  for (std::size_t i = 0; i < a_.size(); ++i) out[i] = std::log(a_[i]);
  return out;
}

std::vector<double> SymmetricMetric::log_warp() const {
  std::vector<double> out(b_.size());
  const auto r = space_->reference_radius();
  for (std::size_t i = 0; i < b_.size(); ++i) {
    out[i] = space_->is_pole(i) ? std::log(a_[i]) : std::log(b_[i] / r[i]);
  }
  return out;
}

SymmetricMetric SymmetricMetric::with_einstein_c(double c) const {
  SymmetricMetric copy = *this;
  copy.einstein_c_ = c;
  return copy;
}

double pole_regularity_defect(const SymmetricMetric& g) {
  const auto& space = g.space();
  const auto a = g.a();
  const auto b = g.b();
  const double ds = space.spacing();
  const std::size_t n = g.size();
  double defect = 0.0;
  if (space.topology() != Topology::Circle) {
    const double slope = (-3.0 * b[0] + 4.0 * b[1] - b[2]) / (2.0 * ds);
    defect = std::abs(slope / a[0] - 1.0);
  }
  if (space.topology() == Topology::Sphere) {
    const double slope = (3.0 * b[n - 1] - 4.0 * b[n - 2] + b[n - 3]) / (2.0 * ds);
    defect = std::max(defect, std::abs(slope / a[n - 1] + 1.0));
  }
  return defect;
}

SymmetricMetric build_background(const BackgroundParams& params) {
  if (!(params.extent > 0.0)) throw InvalidArgument("grid extent must be positive");
  auto space = std::make_shared<const ModelSpace>(params.family, params.m, params.kappa,
                                                  params.extent, params.n_points);
  const std::size_t n = space->size();
  std::vector<double> a(n, 1.0);
  std::vector<double> b(space->reference_radius().begin(), space->reference_radius().end());
  const int m = params.m;
  double c = 0.0;
  switch (space->topology()) {
    case Topology::Ball:
      c = -0.5 * m;
      break;
    case Topology::Sphere:
      c = 0.5 * m * space->reference_curvature();
      break;
    case Topology::Circle:
      c = 0.0;
      break;
  }
  return SymmetricMetric(std::move(space), std::move(a), std::move(b), c);
}

}  // namespace crf
