#include "crf/perturbation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "crf/errors.hpp"

namespace crf {

std::string_view to_string(PerturbationProfile profile) {
  return profile == PerturbationProfile::Sech ? "sech" : "random";
}

PerturbationProfile profile_from_string(std::string_view name) {
  if (name == "sech") return PerturbationProfile::Sech;
  if (name == "random") return PerturbationProfile::Random;
  throw InvalidArgument("unknown perturbation profile '" + std::string(name) + "'");
}

namespace {

struct Term {
  double weight;
  double rate;  // decay exponent on the ball, mode index elsewhere
  double lapse_weight;
};

double shape(Topology topo, double s, double extent, double rate, bool odd_mode) {
  switch (topo) {
    case Topology::Ball: {
      const double t = std::tanh(s);
      return t * t * std::pow(1.0 / std::cosh(s), rate);
    }
    case Topology::Sphere: {
      const double theta = std::numbers::pi * s / extent;
      const double sn = std::sin(theta);
      return sn * sn * std::pow(std::cos(theta), rate);
    }
    case Topology::Circle: {
      const double phase = 2.0 * std::numbers::pi * rate * s / extent;
      return odd_mode ? std::sin(phase) : std::cos(phase);
    }
  }
  return 0.0;
}

}  // namespace

SymmetricMetric perturb(const SymmetricMetric& g, const Perturbation& pert) {
  if (!std::isfinite(pert.amplitude)) throw InvalidArgument("perturbation amplitude must be finite");
  if (!(pert.decay_rate > 0.0)) throw InvalidArgument("perturbation decay rate must be positive");
  const ModelSpace& space = g.space();
  const Topology topo = space.topology();
  const auto& grid = g.grid();
  const double extent = grid.extent();
  const std::size_t n = g.size();

  std::vector<Term> terms;
  if (pert.profile == PerturbationProfile::Sech) {
    const double rate = topo == Topology::Ball ? pert.decay_rate : 1.0;
    terms.push_back({1.0, rate, pert.lapse_ratio});
  } else {
    std::mt19937_64 rng(pert.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> rate(pert.decay_rate, pert.decay_rate + 2.0);
    for (int j = 0; j < 3; ++j) {
      const double w = unit(rng);
      const double r = topo == Topology::Ball ? rate(rng) : static_cast<double>(j + 1);
      terms.push_back({w, r, unit(rng)});
    }
  }

  std::vector<double> dbeta(n, 0.0), dalpha(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < terms.size(); ++j) {
      const double f = shape(topo, grid[i], extent, terms[j].rate, j % 2 == 1);
      dbeta[i] += terms[j].weight * f;
      dalpha[i] += terms[j].weight * terms[j].lapse_weight * f;
    }
  }
  double scale = 0.0;
  for (double v : dbeta) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return g;

  std::vector<double> alpha = g.log_lapse();
  std::vector<double> beta = g.log_warp();
  const double k = pert.amplitude / scale;
  for (std::size_t i = 0; i < n; ++i) {
    alpha[i] += k * dalpha[i];
    beta[i] += k * dbeta[i];
  }
  return SymmetricMetric::from_log(g.space_ptr(), alpha, beta, g.einstein_c());
}

}  // namespace crf
