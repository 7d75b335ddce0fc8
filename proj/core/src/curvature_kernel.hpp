#pragma once

#include <cmath>
#include <span>

#include "crf/metric.hpp"
#include "crf/stencil.hpp"
#include "dual.hpp"

namespace crf::detail {

using std::exp;
using std::expm1;

// Sectional curvatures at node i from alpha = log a and beta = log(b/r).
//
// With b = r e^beta, r'' = -K r and r'^2 + K r^2 = kappa, the reduced formulas
// k_rad = -(1/(a b)) (b_s/a)_s and k_sph = (kappa - (b_s/a)^2) / b^2 become
//
//   k_rad = e^{-2 alpha} [K - (beta_s - alpha_s)(L + beta_s) - L beta_s - beta_ss]
//   k_sph = e^{-2 beta}  [K - L^2 expm1(2d) - e^{2d}(2 L beta_s + beta_s^2)]
//
// with L = r'/r and d = beta - alpha. Both are exact for the reference space
// form. At a pole both limits equal e^{-2 alpha}[K - 3 beta'' + alpha''].
template <class T>
void sectional_at(const ModelSpace& space, const Stencil& st, std::span<const T> alpha,
                  std::span<const T> beta, std::size_t i, T& k_rad, T& k_sph) {
  const double K = space.reference_curvature();
  if (space.is_pole(i)) {
    const T a2 = st.second(alpha, i, Parity::Even);
    const T b2 = st.second(beta, i, Parity::Even);
    k_rad = exp(alpha[i] * -2.0) * (T(K) - b2 * 3.0 + a2);
    k_sph = k_rad;
    return;
  }
  const double L = space.reference_log_derivative()[i];
  const T as = st.first(alpha, i, Parity::Even);
  const T bs = st.first(beta, i, Parity::Even);
  const T bss = st.second(beta, i, Parity::Even);
  const T d = beta[i] - alpha[i];
  k_rad = exp(alpha[i] * -2.0) * (T(K) - (bs - as) * (bs + L) - bs * L - bss);
  k_sph = exp(beta[i] * -2.0) *
          (T(K) - expm1(d * 2.0) * (L * L) - exp(d * 2.0) * (bs * (2.0 * L) + bs * bs));
}

}  // namespace crf::detail
