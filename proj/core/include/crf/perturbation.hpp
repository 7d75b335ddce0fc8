#pragma once

#include <cstdint>
#include <string_view>

#include "crf/metric.hpp"

namespace crf {

enum class PerturbationProfile {
  /// tanh^2(s) sech^k(s) on the ball (k = decay_rate, so O(x^k) at infinity),
  /// sin^2 cos on the sphere, a single Fourier mode on the circle.
  Sech,
  /// Seeded sum of three terms of the same kind with random amplitudes; on
  /// the ball the rates are drawn from [decay_rate, decay_rate + 2].
  Random,
};

std::string_view to_string(PerturbationProfile profile);
PerturbationProfile profile_from_string(std::string_view name);

struct Perturbation {
  /// Sup of the perturbation of log b / r; log a moves by lapse_ratio times it.
  double amplitude = 0.0;
  PerturbationProfile profile = PerturbationProfile::Sech;
  double decay_rate = 2.0;
  double lapse_ratio = -0.5;
  std::uint64_t seed = 0;

  bool operator==(const Perturbation&) const = default;
};

/// Adds the profile to alpha = log a and beta = log(b / r). Every profile is
/// even at the poles, so regularity is preserved.
SymmetricMetric perturb(const SymmetricMetric& g, const Perturbation& perturbation);

}  // namespace crf
