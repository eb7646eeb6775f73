#include <doctest.h>

#include <cmath>

#include "heatlab/numerics.hpp"

namespace nm = heatlab::numerics;

TEST_CASE("integrate handles endpoint singularities and infinite ranges") {
  auto f = [](double s) { return 1.0 / std::sqrt(s); };
  CHECK(nm::integrate(f, 0.0, 1.0, {}, 1e-12) == doctest::Approx(2.0).epsilon(1e-10));

  auto g = [](double s) { return std::exp(-s); };
  const double breaks[] = {1.0, 5.0};
  CHECK(nm::integrate(g, 0.0, INFINITY, breaks, 1e-12) == doctest::Approx(1.0).epsilon(1e-10));

  // (1 - cos s) s^{-3/2} integrates to sqrt(2 pi)
  auto h = [](double s) {
    const double w = std::sin(0.5 * s);
    const double v = 2.0 * w * w * std::pow(s, -1.5);
    return std::isfinite(v) ? v : 0.0;
  };
  double total = nm::integrate(h, 0.0, 200.0, {}, 1e-12);
  total += nm::integrate([](double s) { return std::pow(s, -1.5); }, 200.0, INFINITY, {}, 1e-12);
  // oscillatory remainder of -cos s s^{-3/2} beyond 200 is O(200^{-1.5}) and omitted
  CHECK(total == doctest::Approx(std::sqrt(2.0 * nm::kPi)).epsilon(2e-3));
}

TEST_CASE("wynn epsilon accelerates alternating series") {
  auto term = [](int k) { return (k % 2 == 0 ? 1.0 : -1.0) / (k + 1.0); };
  auto res = nm::accelerated_sum(term, 1e-12, 0.0, 200);
  CHECK(res.converged);
  CHECK(res.terms < 40);
  CHECK(res.value == doctest::Approx(std::log(2.0)).epsilon(1e-10));
}

TEST_CASE("series stops once remaining terms vanish") {
  auto term = [](int k) { return k < 5 ? 1.0 : 0.0; };
  auto res = nm::accelerated_sum(term, 1e-12, 0.0, 100, [](int k) { return k >= 4; });
  CHECK(res.converged);
  CHECK(res.value == 5.0);
}

TEST_CASE("bessel zeros and grids") {
  CHECK(nm::bessel_j0_zero(1) == doctest::Approx(2.404825557695773).epsilon(1e-14));
  CHECK(nm::bessel_j0_zero(5000) == doctest::Approx((5000 - 0.25) * nm::kPi).epsilon(1e-6));
  auto g = nm::geomspace(1e-3, 1e3, 61);
  CHECK(g.front() == 1e-3);
  CHECK(g.back() == 1e3);
  CHECK(g[30] == doctest::Approx(1.0));
  CHECK(nm::sphere_area(1) == doctest::Approx(2.0));
  CHECK(nm::sphere_area(2) == doctest::Approx(2.0 * nm::kPi));
  CHECK(nm::sphere_area(3) == doctest::Approx(4.0 * nm::kPi));
}
