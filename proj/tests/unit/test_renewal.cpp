#include <doctest.h>

#include <cmath>
#include <sstream>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "heatlab/errors.hpp"
#include "heatlab/numerics.hpp"
#include "heatlab/renewal.hpp"

using namespace heatlab;
namespace nm = heatlab::numerics;

namespace {

// kappa by direct quadrature over (0, inf) without the tan substitution
double kappa_direct(const ProcessModel& m, double xi) {
  auto f = [&](double z) {
    const double p = m.psi(xi * z);
    return p > 0.0 && std::isfinite(p) ? std::log(p) / (1.0 + z * z) : 0.0;
  };
  const double a = nm::integrate(f, 0.0, 1.0, {}, 1e-10);
  const double b = nm::integrate(f, 1.0, std::numeric_limits<double>::infinity(), {}, 1e-10);
  return std::exp((a + b) / nm::kPi);
}

RenewalGrid small_grid() { return {-2.0, 2.0, 8}; }

}  // namespace

TEST_CASE("kappa") {
  auto s = ProcessModel::stable(1, 1.0);
  CHECK(kappa(s, 4.0) == doctest::Approx(2.0).epsilon(1e-8));
  for (double a : {0.5, 1.5}) {
    CHECK(kappa(ProcessModel::stable(2, a), 3.0) == doctest::Approx(std::pow(3.0, a / 2)).epsilon(1e-8));
  }
  for (const auto& m : {ProcessModel::sum_of_stables(1, 0.5, 1.5), ProcessModel::truncated_stable(1, 1.0, 0.5),
                        ProcessModel::subordinate_bm(1, 1.0)}) {
    const double k1 = kappa(m, 1.0);
    CHECK(k1 == doctest::Approx(kappa_direct(m, 1.0)).epsilon(1e-6));
    CHECK(kappa(m, 2.0) >= k1);
  }
  CHECK_THROWS_AS(kappa(s, 0.0), DomainError);
}

TEST_CASE("complex kappa continues the real one") {
  auto m = ProcessModel::sum_of_stables(1, 0.5, 1.5);
  const auto k = kappa_complex(m, {2.0, 0.0});
  CHECK(k.real() == doctest::Approx(kappa(m, 2.0)).epsilon(1e-8));
  CHECK(std::abs(k.imag()) < 1e-10);
  const auto ks = kappa_complex(ProcessModel::stable(1, 1.0), {0.0, 4.0});
  CHECK(std::abs(ks - std::sqrt(std::complex<double>(0.0, 4.0))) < 1e-8);
}

TEST_CASE("laplace inversion rules") {
  // 1/s^2 <-> t
  CHECK(invert_laplace_stehfest([](double s) { return 1.0 / (s * s); }, 2.0, 12) ==
        doctest::Approx(2.0).epsilon(1e-6));
  CHECK(invert_laplace_talbot([](std::complex<double> s) { return 1.0 / (s + 1.0); }, 1.5, 32) ==
        doctest::Approx(std::exp(-1.5)).epsilon(1e-10));
  CHECK_THROWS_AS(invert_laplace_stehfest([](double) { return 1.0; }, 1.0, 7), DomainError);
}

TEST_CASE("exact backend reproduces the stable renewal function") {
  for (double a : {0.5, 1.0, 1.5}) {
    auto t = build_renewal_table(ProcessModel::stable(1, a), RenewalBackend::ExactLaplace, small_grid());
    const double g = boost::math::tgamma(1.0 + a / 2);
    for (double r : nm::geomspace(1e-2, 1e2, 17)) {
      CHECK(t.V(r) == doctest::Approx(std::pow(r, a / 2) / g).epsilon(1e-3));
    }
    CHECK(t.V(0.0) == 0.0);
  }
}

TEST_CASE("contour fallback agrees with the real-axis rule") {
  InversionOptions opt;
  opt.force_contour = true;
  auto t = build_renewal_table(ProcessModel::stable(1, 1.0), RenewalBackend::ExactLaplace, small_grid(), opt);
  CHECK(t.rule().rfind("talbot", 0) == 0);
  CHECK(t.V(1.0) == doctest::Approx(1.0 / boost::math::tgamma(1.5)).epsilon(1e-6));
}

TEST_CASE("proxy backend and table queries") {
  auto m = ProcessModel::power_law_nu(1, 1.0, 1.0);
  auto t = build_renewal_table(m, RenewalBackend::HProxy, small_grid());
  CHECK(t.V(1.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(t.backend() == RenewalBackend::HProxy);
  CHECK(t.model_fingerprint() == m.fingerprint());

  for (double s : nm::geomspace(t.V(t.r_min()) * 1.0001, t.V(t.r_max()) * 0.9999, 40)) {
    CHECK(t.V(t.Vinverse(s)) == doctest::Approx(s).epsilon(1e-9));
  }
  for (double r : nm::geomspace(t.r_min(), t.r_max(), 50)) CHECK(t.Vprime(r) >= 0.0);
  CHECK_THROWS_AS(t.V(t.r_max() * 1.01), RangeError);
  CHECK_THROWS_AS(t.Vinverse(1e9), RangeError);
  CHECK(renewal_eval(t, RenewalQuery::V, 4.0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("normalized stable table inverts to t") {
  auto t = build_renewal_table(ProcessModel::stable(1, 1.0), RenewalBackend::ExactLaplace, small_grid())
               .rescaled(boost::math::tgamma(1.5));
  CHECK(t.normalization() == doctest::Approx(boost::math::tgamma(1.5)));
  CHECK(t.Vinverse(std::sqrt(4.0)) == doctest::Approx(4.0).epsilon(2e-3));
  CHECK(t.Vprime(1.0) == doctest::Approx(0.5).epsilon(2e-3));
}

TEST_CASE("csv round trip") {
  auto t = build_renewal_table(ProcessModel::sum_of_stables(2, 0.5, 1.5), RenewalBackend::HProxy, small_grid());
  std::stringstream ss;
  t.write_csv(ss);
  auto u = RenewalTable::read_csv(ss);
  CHECK(u.radii() == t.radii());
  CHECK(u.values() == t.values());
  CHECK(u.model_fingerprint() == t.model_fingerprint());
  CHECK(u.V(3.3) == t.V(3.3));
  std::stringstream bad("r,V,Vprime\n1,2,3\n");
  CHECK_THROWS_AS(RenewalTable::read_csv(bad), DomainError);
}

TEST_CASE("table invariants are enforced") {
  CHECK_THROWS_AS(RenewalTable(RenewalBackend::HProxy, 0, {1, 2, 3, 4}, {1, 2, 2, 3}, {1, 1, 1, 1}),
                  InversionUnstable);
  try {
    RenewalTable(RenewalBackend::HProxy, 0, {1, 2, 3, 4}, {1, 2, 1.5, 3}, {1, 1, 1, 1});
  } catch (const InversionUnstable& e) {
    CHECK(e.radii().size() == 1);
    CHECK(e.radii()[0] == 3.0);
  }
}

TEST_CASE("condition H") {
  auto t = build_renewal_table(ProcessModel::stable(1, 1.0), RenewalBackend::ExactLaplace, small_grid());
  auto h = estimate_H(t, 1.0, 60);
  CHECK(h.H == doctest::Approx(1.0).epsilon(1e-3));

  // brute force over the same triple grid for a non-concave renewal function
  auto p = build_renewal_table(ProcessModel::sum_of_stables(1, 0.5, 1.5), RenewalBackend::HProxy, small_grid());
  const std::size_t n = 30;
  auto e = estimate_H(p, 10.0, n);
  double brute = 1.0;
  for (double x : nm::geomspace(p.radii().front(), 10.0, n)) {
    const auto ys = nm::geomspace(x, 5 * x, n);
    for (double y : ys) {
      brute = std::max(brute, p.Vprime(y) / p.Vprime(x));
      for (double z : ys) {
        if (z > y) brute = std::max(brute, (p.V(z) - p.V(y)) / (p.Vprime(x) * (z - y)));
      }
    }
  }
  CHECK(e.H >= 1.0);
  CHECK(std::isfinite(e.H));
  CHECK(e.H == doctest::Approx(brute).epsilon(1e-12));
  CHECK(e.x <= e.y);
  CHECK(e.y <= e.z);
  CHECK(e.z <= 5 * e.x * (1 + 1e-12));
}

TEST_CASE("backend agreement, h V^2 band and scaling transfer") {
  const RenewalGrid grid = small_grid();
  for (const auto& m : {ProcessModel::stable(1, 1.0), ProcessModel::sum_of_stables(1, 0.5, 1.5),
                        ProcessModel::truncated_stable(1, 1.0, 0.5), ProcessModel::subordinate_bm(1, 1.0)}) {
    auto ex = build_renewal_table(m, RenewalBackend::ExactLaplace, grid);
    auto px = build_renewal_table(m, RenewalBackend::HProxy, grid);
    auto band = compare_tables(ex, px);
    CHECK(band.K() <= 10.0);
    auto hv = h_v2_band(m, ex);
    CHECK(hv.lower > 0.0);
    CHECK(hv.upper < 1e3);
    const double A = scaling_transfer_constant(ex, verify_scaling(m, 1.0).alpha_low);
    CHECK(A >= 1.0);
    CHECK(std::isfinite(A));
  }
  // power law: V is an exact power, so A = 1
  auto s = build_renewal_table(ProcessModel::stable(1, 1.2), RenewalBackend::HProxy, grid);
  CHECK(scaling_transfer_constant(s, 1.2) == doctest::Approx(1.0).epsilon(1e-9));
}
