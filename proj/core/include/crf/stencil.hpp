#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "crf/metric.hpp"

namespace crf {

/// Reflection parity of a radial field across a pole. Warping-type fields
/// (b, vector components) are odd; lapse and scalars are even.
enum class Parity { Even, Odd };

/// Second-order finite differences on a ModelSpace grid.
///
/// Interior nodes use central differences. Pole nodes use a reflected ghost
/// value f(-ds) = +/- f(ds). The outer end of the ball uses one-sided
/// second-order stencils, and the circle wraps periodically.
class Stencil {
 public:
  explicit Stencil(const ModelSpace& space)
      : topology_(space.topology()), n_(space.size()), ds_(space.spacing()) {}

  template <class T>
  T first(std::span<const T> f, std::size_t i, Parity parity) const {
    const double inv = 1.0 / (2.0 * ds_);
    if (topology_ == Topology::Circle) {
      const std::size_t p = n_ - 1;
      const std::size_t j = i % p;
      return (f[(j + 1) % p] - f[(j + p - 1) % p]) * inv;
    }
    if (i == 0) {
      return parity == Parity::Even ? T(0.0) : f[1] * (2.0 * inv);
    }
    if (i == n_ - 1) {
      if (topology_ == Topology::Sphere) {
        return parity == Parity::Even ? T(0.0) : -(f[n_ - 2] * (2.0 * inv));
      }
      return (f[i] * 3.0 - f[i - 1] * 4.0 + f[i - 2]) * inv;
    }
    return (f[i + 1] - f[i - 1]) * inv;
  }

  template <class T>
  T second(std::span<const T> f, std::size_t i, Parity parity) const {
    const double inv = 1.0 / (ds_ * ds_);
    if (topology_ == Topology::Circle) {
      const std::size_t p = n_ - 1;
      const std::size_t j = i % p;
      return (f[(j + 1) % p] - f[j] * 2.0 + f[(j + p - 1) % p]) * inv;
    }
    if (i == 0) {
      return parity == Parity::Even ? (f[1] - f[0]) * (2.0 * inv) : f[0] * (-2.0 * inv);
    }
    if (i == n_ - 1) {
      if (topology_ == Topology::Sphere) {
        return parity == Parity::Even ? (f[n_ - 2] - f[i]) * (2.0 * inv)
                                      : f[i] * (-2.0 * inv);
      }
      return (f[i] * 2.0 - f[i - 1] * 5.0 + f[i - 2] * 4.0 - f[i - 3]) * inv;
    }
    return (f[i + 1] - f[i] * 2.0 + f[i - 1]) * inv;
  }

  std::vector<double> first(std::span<const double> f, Parity parity) const;
  std::vector<double> second(std::span<const double> f, Parity parity) const;

 private:
  Topology topology_;
  std::size_t n_;
  double ds_;
};

}  // namespace crf
