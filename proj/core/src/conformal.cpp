#include "crf/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "crf/errors.hpp"
#include "crf/stencil.hpp"
#include "crf/tridiagonal.hpp"
#include "curvature_kernel.hpp"
#include "dual.hpp"

namespace crf {

namespace {

using detail::Dual;

template <class T>
T scalar_at(const ModelSpace& space, const Stencil& st, std::span<const T> alpha,
            std::span<const T> beta, std::size_t i) {
  T k_rad, k_sph;
  detail::sectional_at<T>(space, st, alpha, beta, i, k_rad, k_sph);
  const int m = space.m();
  return (k_rad * 2.0 + k_sph * static_cast<double>(m - 1)) * static_cast<double>(m);
}

struct Problem {
  const ModelSpace& space;
  Stencil st;
  std::vector<double> alpha0;
  std::vector<double> beta0;
  double target;

  std::vector<double> residual(const std::vector<double>& u) const {
    const std::size_t n = u.size();
    std::vector<double> alpha(n), beta(n), out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      alpha[i] = alpha0[i] + u[i];
      beta[i] = beta0[i] + u[i];
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
      out[i] = scalar_at<double>(space, st, alpha, beta, i) - target;
    }
    return out;
  }

  // Every row couples only to its neighbors, so three colored directional
  // derivatives recover the whole tridiagonal Jacobian.
  TridiagonalMatrix jacobian(const std::vector<double>& u) const {
    const std::size_t n = u.size();
    TridiagonalMatrix J;
    J.sub.assign(n, 0.0);
    J.diag.assign(n, 0.0);
    J.sup.assign(n, 0.0);
    std::vector<Dual> alpha(n), beta(n);
    for (std::size_t color = 0; color < 3; ++color) {
      for (std::size_t i = 0; i < n; ++i) {
        const double seed = (i % 3 == color && i + 1 < n) ? 1.0 : 0.0;
        alpha[i] = Dual(alpha0[i] + u[i], seed);
        beta[i] = Dual(beta0[i] + u[i], seed);
      }
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const double d = scalar_at<Dual>(space, st, alpha, beta, i).d;
        if (i % 3 == color) {
          J.diag[i] = d;
        } else if ((i + 1) % 3 == color) {
          J.sup[i] = d;
        } else {
          J.sub[i] = d;
        }
      }
    }
    J.diag[n - 1] = 1.0;
    J.sub[n - 1] = 0.0;
    return J;
  }
};

double sup_abs(const std::vector<double>& v) {
  double best = 0.0;
  for (double x : v) best = std::max(best, std::abs(x));
  return best;
}

}  // namespace

ConformalResult conformal_normalize(const SymmetricMetric& g, const ConformalOptions& options) {
  if (g.family() != Family::AhBall) {
    throw InvalidArgument("conformal normalization is defined for AH_BALL metrics only");
  }
  const int m = g.m();
  const std::size_t n = g.size();
  Problem problem{g.space(), Stencil(g.space()), g.log_lapse(), g.log_warp(),
                  -static_cast<double>(m) * (m + 1)};

  std::vector<double> u(n, 0.0);
  std::vector<double> F = problem.residual(u);
  double res = sup_abs(F);
  int iter = 0;
  while (res > options.tolerance) {
    if (iter == options.max_iterations) {
      std::ostringstream msg;
      msg << "conformal Newton did not converge after " << iter
          << " iterations (residual " << res << ")";
      throw SolverError(msg.str());
    }
    ++iter;
    std::vector<double> rhs(n);
    for (std::size_t i = 0; i < n; ++i) rhs[i] = -F[i];
    rhs[n - 1] = 0.0;
    const std::vector<double> delta = TridiagonalLU(problem.jacobian(u)).solve(rhs);

    double step = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 30; ++halving, step *= 0.5) {
      std::vector<double> trial(n);
      for (std::size_t i = 0; i < n; ++i) trial[i] = u[i] + step * delta[i];
      std::vector<double> trial_F = problem.residual(trial);
      const double trial_res = sup_abs(trial_F);
      if (std::isfinite(trial_res) && trial_res < res) {
        u = std::move(trial);
        F = std::move(trial_F);
        res = trial_res;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // Roundoff floor: no descent direction left.
      if (res <= 1e3 * options.tolerance) break;
      std::ostringstream msg;
      msg << "conformal Newton stalled at iteration " << iter << " (residual " << res << ")";
      throw SolverError(msg.str());
    }
    if (sup_abs(u) > 30.0) {
      throw SolverError("conformal Newton left the basin: |u| exceeds 30");
    }
  }

  std::vector<double> alpha(n), beta(n), w(n);
  for (std::size_t i = 0; i < n; ++i) {
    alpha[i] = problem.alpha0[i] + u[i];
    beta[i] = problem.beta0[i] + u[i];
    w[i] = std::exp(0.5 * (m - 1) * u[i]);
  }
  return ConformalResult{SymmetricMetric::from_log(g.space_ptr(), alpha, beta, g.einstein_c()),
                         std::move(w), iter, res};
}

}  // namespace crf
