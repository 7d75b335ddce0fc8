#pragma once

// Shared builders for tests: metrics from analytic profiles, seeded random
// AH perturbations and a dense reference for tridiagonal systems.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <vector>

#include "crf/elliptic.hpp"
#include "crf/metric.hpp"
#include "crf/perturbation.hpp"

namespace fixture {

inline std::shared_ptr<const crf::ModelSpace> space(crf::Family family, int m, int kappa,
                                                    double extent, std::size_t n) {
  return std::make_shared<const crf::ModelSpace>(family, m, kappa, extent, n);
}

/// Samples a(s), b(s) on the grid of `sp`.
inline crf::SymmetricMetric sample(const std::shared_ptr<const crf::ModelSpace>& sp,
                                   const std::function<double(double)>& a,
                                   const std::function<double(double)>& b, double c) {
  std::vector<double> av(sp->size()), bv(sp->size());
  for (std::size_t i = 0; i < sp->size(); ++i) {
    av[i] = a(sp->grid()[i]);
    bv[i] = b(sp->grid()[i]);
  }
  return crf::SymmetricMetric(sp, av, bv, c);
}

inline crf::SymmetricMetric hyperbolic(int m, double s_max, std::size_t n) {
  return crf::build_background({crf::Family::AhBall, m, 1, s_max, n});
}

/// Seeded random perturbation of hyperbolic space with the library's own
/// profiles; `rate` is the decay exponent of the slowest term.
inline crf::SymmetricMetric random_ah(int m, double s_max, std::size_t n, std::uint64_t seed,
                                      double amplitude = 0.01, double rate = 2.0) {
  crf::Perturbation p;
  p.amplitude = amplitude;
  p.profile = crf::PerturbationProfile::Random;
  p.decay_rate = rate;
  p.seed = seed;
  return crf::perturb(hyperbolic(m, s_max, n), p);
}

inline double sup_diff(std::span<const double> x, std::span<const double> y,
                       std::size_t begin = 0, std::size_t end = static_cast<std::size_t>(-1)) {
  double worst = 0.0;
  end = std::min(end, x.size());
  for (std::size_t i = begin; i < end; ++i) worst = std::max(worst, std::abs(x[i] - y[i]));
  return worst;
}

inline double sup_abs(std::span<const double> x, std::size_t begin = 0,
                      std::size_t end = static_cast<std::size_t>(-1)) {
  double worst = 0.0;
  end = std::min(end, x.size());
  for (std::size_t i = begin; i < end; ++i) worst = std::max(worst, std::abs(x[i]));
  return worst;
}

inline Eigen::MatrixXd dense(const crf::TridiagonalMatrix& m) {
  const auto n = static_cast<Eigen::Index>(m.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out(i, i) = m.diag[i];
    if (i > 0) out(i, i - 1) = m.sub[i];
    if (i + 1 < n) out(i, i + 1) = m.sup[i];
  }
  if (m.periodic) {
    out(0, n - 1) += m.sub[0];
    out(n - 1, 0) += m.sup[n - 1];
  }
  return out;
}

inline std::vector<double> dense_solve(const crf::TridiagonalMatrix& m,
                                       const std::vector<double>& rhs) {
  const Eigen::MatrixXd a = dense(m);
  const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(rhs.data(), rhs.size());
  const Eigen::VectorXd x = a.fullPivLu().solve(b);
  return {x.data(), x.data() + x.size()};
}

/// Smallest singular value over the largest one, by dense SVD.
inline double singular_ratio(const crf::TridiagonalMatrix& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(dense(m));
  const auto& s = svd.singularValues();
  return s(s.size() - 1) / s(0);
}

/// Least-squares slope of log e against log h.
inline double fitted_order(const std::vector<double>& h, const std::vector<double>& e) {
  const double n = static_cast<double>(h.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double x = std::log(h[i]);
    const double y = std::log(e[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace fixture
