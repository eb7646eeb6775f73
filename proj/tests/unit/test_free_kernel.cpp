#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "heatlab/errors.hpp"
#include "heatlab/free_kernel.hpp"
#include "heatlab/numerics.hpp"

using namespace heatlab;
namespace nm = heatlab::numerics;

namespace {

const double kPi = nm::kPi;

double cauchy(int d, double t, double r) {
  if (d == 1) return t / (kPi * (t * t + r * r));
  if (d == 2) return t / (2.0 * kPi * std::pow(t * t + r * r, 1.5));
  return t / (kPi * kPi * std::pow(t * t + r * r, 2.0));
}

// Plain cosine transform on a truncated range with fixed breaks, no series acceleration.
double stable_1d_brute(double alpha, double t, double r) {
  auto f = [&](double s) { return std::exp(-t * std::pow(s, alpha)) * std::cos(s * r); };
  const double top = std::pow(50.0 / t, 1.0 / alpha);
  auto br = nm::linspace(0.0, top, 400);
  std::vector<double> inner(br.begin() + 1, br.end() - 1);
  return nm::integrate(f, 0.0, top, inner, 1e-12) / kPi;
}

RenewalGrid grid() { return {-3.0, 3.0, 8}; }

}  // namespace

TEST_CASE("cauchy oracles") {
  auto m = ProcessModel::stable(1, 1.0);
  CHECK(p_free(m, 1.0, 0.0) == doctest::Approx(1.0 / kPi).epsilon(1e-6));
  CHECK(p_free(m, 1.0, 1.0) == doctest::Approx(1.0 / (2.0 * kPi)).epsilon(1e-6));
  CHECK(p0(m, 2.0) == doctest::Approx(1.0 / (2.0 * kPi)).epsilon(1e-6));
  for (int d : {1, 2, 3}) {
    auto md = ProcessModel::stable(d, 1.0);
    for (double t : {0.01, 1.0, 30.0}) {
      for (double r : {0.0, 0.05, 1.0, 7.0, 200.0}) {
        CHECK(p_free(md, t, r) == doctest::Approx(cauchy(d, t, r)).epsilon(1e-5));
      }
    }
  }
}

TEST_CASE("stable self-similarity and brute-force transform") {
  auto m = ProcessModel::stable(1, 1.0);
  CHECK(p0(m, 8.0) == doctest::Approx(p0(m, 1.0) / 8.0).epsilon(1e-8));
  auto s = ProcessModel::stable(1, 1.5);
  CHECK(p0(s, 8.0) == doctest::Approx(p0(s, 1.0) * std::pow(8.0, -1.0 / 1.5)).epsilon(1e-8));
  CHECK(p0(s, 1.0) == doctest::Approx(boost::math::tgamma(1.0 + 1.0 / 1.5) / kPi).epsilon(1e-8));
  for (double r : {0.3, 2.0, 9.0}) {
    CHECK(p_free(s, 1.0, r) == doctest::Approx(stable_1d_brute(1.5, 1.0, r)).epsilon(1e-6));
  }
}

TEST_CASE("radial monotonicity for presets") {
  for (int d : {1, 2, 3}) {
    for (const auto& m : {ProcessModel::stable(d, 1.5), ProcessModel::truncated_stable(d, 1.0, 0.5),
                          ProcessModel::sum_of_stables(d, 0.5, 1.5), ProcessModel::subordinate_bm(d, 1.0),
                          ProcessModel::profile_nu(d, NuProfile::Piecewise, 0.8, 1.5)}) {
      for (double t : {0.1, 1.0}) {
        double prev = std::numeric_limits<double>::infinity();
        for (double r : {0.0, 0.25, 0.5, 1.0, 2.0, 4.0}) {
          const double p = p_free(m, t, r);
          CHECK(p <= prev * (1 + 1e-9));
          prev = p;
        }
        CHECK(p_free(m, t, 1.0) >= p_free(m, t, 2.0));
      }
    }
  }
}

TEST_CASE("mass and chapman-kolmogorov in d=1") {
  auto m = ProcessModel::stable(1, 1.5);
  const double t = 1.0;
  const double X = 400.0;
  std::vector<double> xs = nm::linspace(0.0, 4.0, 401);
  auto far = nm::geomspace(4.0, X, 600);
  xs.insert(xs.end(), far.begin() + 1, far.end());
  double mass = 0.0;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    mass += 0.5 * (xs[i] - xs[i - 1]) * (p_free(m, t, xs[i]) + p_free(m, t, xs[i - 1]));
  }
  // two-sided: the tail beyond X carries about t L(X)
  mass = 2.0 * mass + t * tail_mass(m, X);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-4));

  for (double tt : {0.5, 1.0}) {
    for (double x : {0.0, 1.0, 3.0}) {
      auto f = [&](double y) { return p_free(m, tt, std::abs(y)) * p_free(m, tt, std::abs(x - y)); };
      const double brk[] = {-20.0, -5.0, 0.0, x, x + 5.0, x + 20.0};
      std::vector<double> b(std::begin(brk), std::end(brk));
      std::sort(b.begin(), b.end());
      b.erase(std::unique(b.begin(), b.end()), b.end());
      const double conv = nm::gauss_kronrod(f, -60.0, b[0], 1e-9) + [&] {
        double s = 0.0;
        for (std::size_t i = 0; i + 1 < b.size(); ++i) s += nm::gauss_kronrod(f, b[i], b[i + 1], 1e-9);
        return s;
      }() + nm::gauss_kronrod(f, b.back(), 60.0 + x, 1e-9);
      CHECK(conv == doctest::Approx(p_free(m, 2 * tt, x)).epsilon(1e-3));
    }
  }
}

TEST_CASE("hartman-wintner") {
  CHECK(hartman_wintner_holds(ProcessModel::stable(1, 0.5)));
  CHECK(hartman_wintner_holds(ProcessModel::truncated_stable(2, 1.0, 0.5)));
  // gamma-type density: psi(u) = log(1 + u^2)
  auto gamma_like = ProcessModel::custom(1, [](double s) { return std::exp(-s) / s; }, {}, 
                                         std::numeric_limits<double>::infinity(), "gamma-like");
  CHECK_FALSE(hartman_wintner_holds(gamma_like));
  CHECK_THROWS_AS(require_hartman_wintner(gamma_like), UnsupportedRegime);
}

TEST_CASE("envelope") {
  auto m = ProcessModel::stable(1, 1.0);
  auto table = build_renewal_table(m, RenewalBackend::ExactLaplace, grid()).rescaled(boost::math::tgamma(1.5));
  auto e0 = p_free_envelope(m, table, 1.0, 0.0);
  CHECK(e0.regime == KernelRegime::Near);
  CHECK(e0.upper == doctest::Approx(e0.near_branch));
  auto far = p_free_envelope(m, table, 1.0, 10.0);
  CHECK(far.regime == KernelRegime::Far);
  CHECK(far.upper == doctest::Approx(0.01).epsilon(3e-3));
  const double r = 3.0;
  const double tb = std::pow(table.V(r), 2);
  auto edge = p_free_envelope(m, table, tb, r);
  CHECK(edge.near_branch == doctest::Approx(edge.far_branch).epsilon(1e-9));

  EnvelopeConstants c{0.5, 2.0, "test"};
  auto e = p_free_envelope(m, table, 0.7, 1.3, c);
  CHECK(e.lower <= e.upper);
  CHECK(e.profile == "test");
  CHECK_THROWS_AS(p_free_envelope(m, table, 50.0, 0.1, c, 1.0), UnsupportedRegime);

  std::stringstream ss;
  const double rs[] = {0.0, 1.0, 10.0};
  write_kernel_slice(ss, m, table, 1.0, rs);
  std::string header;
  std::getline(ss, header);
  CHECK(header == "t,r,p,lower,upper,regime");
}

TEST_CASE("condition G_R") {
  auto s = ProcessModel::stable(1, 1.0);
  auto ts = build_renewal_table(s, RenewalBackend::HProxy, grid());
  auto g = check_GR(s, ts, 10.0, {6, 6});
  CHECK(g.holds);
  CHECK(g.constant >= 1.0);
  CHECK(std::isfinite(g.constant));

  auto tr = ProcessModel::truncated_stable(1, 1.0, 0.5);
  auto tt = build_renewal_table(tr, RenewalBackend::HProxy, grid());
  CHECK(check_GR(tr, tt, 1.0, {6, 6}).holds);
  auto bad = check_GR(tr, tt, 10.0, {6, 6});
  CHECK_FALSE(bad.holds);
  CHECK(bad.r > 1.0);
}

TEST_CASE("upper constant and small-time lower bound") {
  auto m = ProcessModel::sum_of_stables(1, 0.5, 1.5);
  auto table = build_renewal_table(m, RenewalBackend::HProxy, grid());
  auto c1 = measure_upper_constant(m, table, nm::geomspace(0.01, 10.0, 5), nm::geomspace(0.05, 20.0, 6));
  auto c2 = measure_upper_constant(m, table, nm::geomspace(0.01, 10.0, 9), nm::geomspace(0.05, 20.0, 11));
  CHECK(std::isfinite(c1));
  CHECK(c2 == doctest::Approx(c1).epsilon(0.1));

  const double ys[] = {0.5, 1.0, 2.0};
  const double cands[] = {1.0, 0.3, 0.1, 0.03};
  CHECK(measure_small_time_constant(m, ys, cands, 4) > 0.0);
}
