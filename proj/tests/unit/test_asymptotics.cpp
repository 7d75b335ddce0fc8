#include "doctest.h"

#include <cmath>

#include "crf/asymptotics.hpp"
#include "crf/errors.hpp"
#include "fixtures.hpp"

using namespace crf;

namespace {

std::vector<double> on_grid(const RadialGrid& grid, double (*f)(double)) {
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) out[i] = f(grid[i]);
  return out;
}

}  // namespace

TEST_CASE("weighted sup norm") {
  const RadialGrid grid(Family::AhBall, 8.0, 401);
  CHECK(weighted_sup_norm(std::vector<double>(401, 0.0), 3.0, grid) == 0.0);
  const auto f = on_grid(grid, [](double s) { return std::exp(-2.0 * s); });
  CHECK(weighted_sup_norm(f, 2.0, grid) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(weighted_sup_norm(f, 3.0, grid) == doctest::Approx(std::exp(8.0)).epsilon(1e-12));
  CHECK(weighted_sup_norm(f, 1.0, grid, 100, 200) == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
  std::vector<double> bad = f;
  bad[7] = std::nan("");
  CHECK_THROWS_AS(weighted_sup_norm(bad, 2.0, grid), DegenerationError);
}

TEST_CASE("decay rate fit") {
  const RadialGrid grid(Family::AhBall, 8.0, 401);
  const auto two = on_grid(grid, [](double s) { return 5.0 * std::exp(-2.0 * s); });
  const auto four = on_grid(grid, [](double s) { return std::exp(-4.0 * s); });
  CHECK(*decay_rate_fit(two, grid, 4.0, 7.0) == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(*decay_rate_fit(four, grid, 4.0, 7.0) == doctest::Approx(4.0).epsilon(1e-10));
  const auto sign_change = on_grid(grid, [](double s) { return std::cos(s); });
  CHECK_FALSE(decay_rate_fit(sign_change, grid, 1.0, 4.0).has_value());
  CHECK_FALSE(decay_rate_fit(std::vector<double>(401, 0.0), grid, 4.0, 7.0).has_value());
  CHECK_FALSE(decay_rate_fit(two, grid, 4.0, 4.01).has_value());
}

TEST_CASE("T-tensor report") {
  SUBCASE("hyperbolic space is totally geodesic") {
    const auto report = t_tensor_report(fixture::hyperbolic(3, 8.0, 401));
    CHECK(report.totally_geodesic);
    CHECK(std::abs(report.boundary_limit) <= 1e-6);
    for (double t : report.t_sup_per_slice) CHECK(t >= 0.0);
  }
  SUBCASE("an x^2 change of x b is invisible") {
    // b = sinh s + 0.1 e^{-s} tanh^2 s: x b = 1/2 - 0.4 x^2 + O(x^4), whose
    // x-derivative vanishes at x = 0.
    const auto sp = fixture::space(Family::AhBall, 3, 1, 8.0, 401);
    const auto g = fixture::sample(
        sp, [](double) { return 1.0; },
        [](double s) { return std::sinh(s) + 0.1 * std::exp(-s) * std::pow(std::tanh(s), 2); },
        -1.5);
    CHECK(t_tensor_report(g).totally_geodesic);
  }
  SUBCASE("a first-order change of x b is detected") {
    // b = sinh s (1 + 0.1 tanh^2 s sech s): x b = (1 + 0.2 x) / 2 + O(x^2), so
    // 2 (1 - h) / x -> 2 * 0.2 = 0.4.
    const auto sp = fixture::space(Family::AhBall, 3, 1, 8.0, 401);
    const auto g = fixture::sample(
        sp, [](double) { return 1.0; },
        [](double s) {
          return std::sinh(s) * (1.0 + 0.1 * std::pow(std::tanh(s), 2) / std::cosh(s));
        },
        -1.5);
    const auto report = t_tensor_report(g);
    CHECK_FALSE(report.totally_geodesic);
    CHECK(report.boundary_limit == doctest::Approx(0.4).epsilon(0.02));
  }
  SUBCASE("x^2 perturbations are totally geodesic") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      CHECK(t_tensor_report(fixture::random_ah(3, 8.0, 401, seed, 0.02)).totally_geodesic);
    }
  }
  SUBCASE("closed families are rejected") {
    CHECK_THROWS_AS(t_tensor_report(build_background({Family::Closed, 2, 1, 3.14159, 101})),
                    InvalidArgument);
  }
}

TEST_CASE("x^2 membership of the Einstein deviation") {
  auto ladder = [](double amplitude, double rate) {
    std::vector<SymmetricMetric> out;
    for (std::size_t n : {401, 801}) {
      Perturbation p;
      p.amplitude = amplitude;
      p.decay_rate = rate;
      out.push_back(perturb(fixture::hyperbolic(3, 8.0, n), p));
    }
    return out;
  };
  CHECK(einstein_decay_membership(std::vector{fixture::hyperbolic(3, 8.0, 401)}).member);
  const auto fast = einstein_decay_membership(ladder(0.01, 2.0));
  CHECK(fast.member);
  CHECK(fast.growth_ratio <= kGrowthRatioThreshold);
  const auto slow = einstein_decay_membership(ladder(0.01, 1.0));
  CHECK_FALSE(slow.member);
  CHECK(slow.growth_ratio > kGrowthRatioThreshold);
}
