#include <doctest.h>

#include <cmath>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

#include "heatlab/errors.hpp"
#include "heatlab/numerics.hpp"
#include "heatlab/process_models.hpp"

using namespace heatlab;
namespace nm = heatlab::numerics;

namespace {

std::vector<ProcessModel> presets(int d) {
  return {ProcessModel::stable(d, 1.5),
          ProcessModel::truncated_stable(d, 1.0, 0.0),
          ProcessModel::truncated_stable(d, 1.2, 1.0),
          ProcessModel::sum_of_stables(d, 0.5, 1.5),
          ProcessModel::subordinate_bm(d, 1.0),
          ProcessModel::profile_nu(d, NuProfile::Piecewise, 0.8, 1.5),
          ProcessModel::profile_nu(d, NuProfile::LogRatio, 1.0),
          ProcessModel::profile_nu(d, NuProfile::InverseLog, 1.0)};
}

}  // namespace

TEST_CASE("closed-form exponents") {
  CHECK(psi(ProcessModel::stable(1, 1.5), 2.0) == doctest::Approx(std::pow(2.0, 1.5)).epsilon(1e-14));
  CHECK(psi(ProcessModel::sum_of_stables(1, 0.5, 1.5), 1.0) == doctest::Approx(2.0).epsilon(1e-14));
  for (const auto& m : presets(1)) CHECK(psi(m, 0.0) == 0.0);
  CHECK_THROWS_AS(psi(ProcessModel::stable(1, 1.0), -1.0), DomainError);
}

TEST_CASE("power-law density oracles in d=1") {
  // nu(s) = s^{-2}: h(r) = 2(1/(2-alpha) + 1/alpha) r^{-alpha} = 4/r, L(r) = 2/r
  auto m = ProcessModel::power_law_nu(1, 1.0, 1.0);
  CHECK(nu_radial(m, 2.0) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(pruitt_h(m, 1.0) == doctest::Approx(4.0).epsilon(1e-13));
  CHECK(pruitt_h(m, 2.0) == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(tail_mass(m, 1.0) == doctest::Approx(2.0).epsilon(1e-13));
  // psi = pi u for unit coefficient
  CHECK(psi(m, 1.0) == doctest::Approx(nm::kPi).epsilon(1e-13));
  CHECK_THROWS_AS(nu_radial(m, 0.0), DomainError);
}

TEST_CASE("truncated and profile presets") {
  auto t = ProcessModel::truncated_stable(1, 1.0, 0.0);
  CHECK(nu_radial(t, 2.0) == 0.0);
  CHECK(tail_mass(t, 1.0) == 0.0);
  // beta = 0: L(r) = 2 (1/r - 1), second moment = 2 r for r < 1
  CHECK(tail_mass(t, 0.25) == doctest::Approx(6.0).epsilon(1e-9));
  CHECK(t.second_moment(0.5) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(pruitt_h(t, 4.0) == doctest::Approx(2.0 / 16.0).epsilon(1e-9));

  auto p = ProcessModel::profile_nu(1, NuProfile::Piecewise, 1.0, 1.5);
  CHECK(nu_radial(p, 0.5) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(nu_radial(p, 2.0) == doctest::Approx(0.5 * std::pow(2.0, -1.5) / 2.0).epsilon(1e-14));
}

TEST_CASE("subordinate brownian motion against incomplete gamma oracles") {
  using boost::math::tgamma;
  using boost::math::tgamma_lower;
  for (int d : {1, 2, 3}) {
    const double alpha = 1.2;
    const double a = 0.6;
    auto m = ProcessModel::subordinate_bm(d, alpha);
    for (double u : {1e-3, 0.3, 1.0, 7.0, 300.0}) {
      const double lam = u * u;
      const double phi = (std::pow(lam, a) * tgamma_lower(1.0 - a, lam) + std::expm1(-lam)) / a;
      CHECK(psi(m, u) == doctest::Approx(phi).epsilon(1e-8));
    }
    for (double s : {1e-3, 0.2, 1.0, 3.0, 8.0}) {
      const double oracle = std::pow(nm::kPi, -0.5 * d) * std::pow(4.0, a) * std::pow(s, -d - alpha) *
                            tgamma(0.5 * d + a, 0.25 * s * s);
      CHECK(nu_radial(m, s) == doctest::Approx(oracle).epsilon(1e-8));
    }
  }
}

TEST_CASE("psi from the density matches the stable closed form") {
  for (int d : {1, 2, 3}) {
    for (double alpha : {0.5, 1.0, 1.5}) {
      const double A = stable_nu_constant(d, alpha);
      auto custom = ProcessModel::custom(d, [=](double s) { return A * std::pow(s, -d - alpha); });
      for (double u : nm::geomspace(1e-2, 1e2, 9)) {
        CHECK(psi(custom, u) == doctest::Approx(std::pow(u, alpha)).epsilon(1e-6));
      }
      CHECK(custom.psi_fast(3.3) == doctest::Approx(std::pow(3.3, alpha)).epsilon(1e-6));
    }
  }
}

TEST_CASE("derived psi for sum of stables density") {
  const double a1 = 0.7, a2 = 1.4;
  const double A1 = stable_nu_constant(2, a1), A2 = stable_nu_constant(2, a2);
  auto custom = ProcessModel::custom(2, [=](double s) { return A1 * std::pow(s, -2 - a1) + A2 * std::pow(s, -2 - a2); });
  for (double u : {0.05, 1.0, 40.0}) {
    CHECK(psi(custom, u) == doctest::Approx(std::pow(u, a1) + std::pow(u, a2)).epsilon(1e-8));
  }
}

TEST_CASE("preset invariants") {
  const auto grid = nm::geomspace(1e-3, 1e3, 61);
  for (int d : {1, 2, 3}) {
    for (const auto& m : presets(d)) {
      CAPTURE(m.describe());
      double prev_h = INFINITY, prev_r2h = 0.0, prev_nu = INFINITY;
      for (double r : grid) {
        const double h = pruitt_h(m, r);
        CHECK(std::isfinite(h));
        CHECK(h < prev_h);
        CHECK(r * r * h >= prev_r2h * (1.0 - 1e-9));
        const double v = nu_radial(m, r);
        CHECK(v <= prev_nu);
        prev_h = h;
        prev_r2h = r * r * h;
        prev_nu = v;
      }
      CHECK(tail_mass(m, 0.7) <= pruitt_h(m, 0.7));
      // infinite Levy measure: the ring mass nu(eps < |z| < 1) keeps growing
      double ring_prev = 0.0;
      for (double eps : {1e-2, 1e-4, 1e-6}) {
        const double ring = tail_mass(m, eps) - tail_mass(m, 1.0);
        CHECK(ring > 2.0 * ring_prev);
        ring_prev = ring;
      }
    }
  }
}

TEST_CASE("psi positivity and monotonicity of the cached table") {
  for (const auto& m : presets(2)) {
    CAPTURE(m.describe());
    double prev = 0.0;
    for (double u : nm::geomspace(1e-4, 1e4, 33)) {
      const double p = m.psi_fast(u);
      CHECK(p > prev);
      CHECK(p == doctest::Approx(m.psi(u)).epsilon(1e-6));
      prev = p;
    }
  }
}

TEST_CASE("scaling certificates") {
  auto st = verify_scaling(ProcessModel::stable(1, 1.2), 0.0);
  CHECK(st.alpha_low == doctest::Approx(1.2).epsilon(1e-6));
  CHECK(st.alpha_up == doctest::Approx(1.2).epsilon(1e-6));
  CHECK(st.c_low == 1.0);
  CHECK(st.C_up == 1.0);
  CHECK(st.global_low);

  ScalingGrid grid;
  auto sum = verify_scaling(ProcessModel::sum_of_stables(1, 0.5, 1.5), 0.0, grid);
  CHECK(sum.alpha_low == doctest::Approx(0.5).epsilon(0.02));
  CHECK(sum.alpha_up == doctest::Approx(1.5).epsilon(0.02));
  // brute-force extremal constants on the same grid
  const auto us = nm::geomspace(grid.u_min, grid.u_min * 1e12, 121);
  double cmin = 1.0, cmax = 1.0;
  auto f = [](double u) { return std::sqrt(u) + std::pow(u, 1.5); };
  for (std::size_t i = 0; i < us.size(); ++i) {
    for (std::size_t j = i + 1; j < us.size(); ++j) {
      const double lam = us[j] / us[i];
      const double r = f(us[j]) / f(us[i]);
      cmin = std::min(cmin, r / std::pow(lam, sum.alpha_low));
      cmax = std::max(cmax, r / std::pow(lam, sum.alpha_up));
    }
  }
  CHECK(sum.c_low == doctest::Approx(cmin).epsilon(1e-9));
  CHECK(sum.C_up == doctest::Approx(cmax).epsilon(1e-9));
  CHECK(sum.c_low <= 1.0);
  CHECK(sum.C_up >= 1.0);

  auto tr = verify_scaling(ProcessModel::truncated_stable(1, 1.0, 0.0), 1.0);
  CHECK(tr.alpha_low == doctest::Approx(1.0).epsilon(0.05));
  CHECK(tr.c_low < 1.0);
  CHECK(tr.alpha_up >= 1.0);
  CHECK(tr.alpha_up < 1.2);
  CHECK_FALSE(tr.global_low);
}

TEST_CASE("scaling violation and invalid models") {
  // nu(s) = s^{-1} / log(1 + 1/s): infinite but psi grows like log log u
  auto slow = ProcessModel::custom(1, [](double s) { return 1.0 / (s * std::log1p(1.0 / s)); });
  CHECK_THROWS_AS(verify_scaling(slow, 0.0), ScalingViolated);
  CHECK_THROWS_AS(ProcessModel::stable(1, 2.0), ModelInvalid);
  CHECK_THROWS_AS(ProcessModel::stable(4, 1.0), ModelInvalid);
  CHECK_THROWS_AS(ProcessModel::custom(1, [](double s) { return s; }), ModelInvalid);
  CHECK_THROWS_AS(ProcessModel::custom(1, [](double s) { return std::pow(s, -0.5); }), ModelInvalid);
}

TEST_CASE("fingerprints identify parameters") {
  CHECK(ProcessModel::stable(1, 1.5).fingerprint() == ProcessModel::stable(1, 1.5).fingerprint());
  CHECK(ProcessModel::stable(1, 1.5).fingerprint() != ProcessModel::stable(1, 1.4).fingerprint());
  CHECK(ProcessModel::stable(2, 1.5).fingerprint() != ProcessModel::stable(1, 1.5).fingerprint());
}

TEST_CASE("subordinate tail and moment agree with direct density quadrature") {
  for (int d : {1, 3}) {
    auto m = ProcessModel::subordinate_bm(d, 1.4);
    auto direct = ProcessModel::custom(d, [m](double s) { return m.nu(s); });
    for (double r : {0.05, 1.0, 4.0}) {
      CHECK(tail_mass(m, r) == doctest::Approx(tail_mass(direct, r)).epsilon(1e-7));
      CHECK(m.second_moment(r) == doctest::Approx(direct.second_moment(r)).epsilon(1e-7));
    }
  }
}
