#pragma once

#include <cmath>

namespace crf::detail {

// Forward-mode dual number; one directional derivative per pass.
struct Dual {
  double v = 0.0;
  double d = 0.0;

  Dual() = default;
  Dual(double value) : v(value) {}  // NOLINT(google-explicit-constructor)
  Dual(double value, double deriv) : v(value), d(deriv) {}
};

inline Dual operator+(Dual x, Dual y) { return {x.v + y.v, x.d + y.d}; }
inline Dual operator-(Dual x, Dual y) { return {x.v - y.v, x.d - y.d}; }
inline Dual operator-(Dual x) { return {-x.v, -x.d}; }
inline Dual operator*(Dual x, Dual y) { return {x.v * y.v, x.d * y.v + x.v * y.d}; }
inline Dual operator*(Dual x, double y) { return {x.v * y, x.d * y}; }
inline Dual operator*(double x, Dual y) { return {x * y.v, x * y.d}; }
inline Dual operator/(Dual x, Dual y) {
  return {x.v / y.v, (x.d * y.v - x.v * y.d) / (y.v * y.v)};
}
inline Dual exp(Dual x) {
  const double e = std::exp(x.v);
  return {e, e * x.d};
}
inline Dual expm1(Dual x) { return {std::expm1(x.v), std::exp(x.v) * x.d}; }

inline double value(double x) { return x; }
inline double value(Dual x) { return x.v; }

}  // namespace crf::detail
