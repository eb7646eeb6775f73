#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "heatlab/dirichlet_bounds.hpp"
#include "heatlab/errors.hpp"
#include "heatlab/numerics.hpp"

using namespace heatlab;
namespace nm = heatlab::numerics;

namespace {

// Exact table rescaled so that V(r) = r^{alpha/2} for psi(u) = u^alpha.
RenewalTable normalized_stable_table(const ProcessModel& m, double alpha) {
  auto t = build_renewal_table(m, RenewalBackend::ExactLaplace, RenewalGrid{-3, 3, 8});
  return t.rescaled(boost::math::tgamma(1.0 + 0.5 * alpha));
}

const ProcessModel& cauchy1() {
  static const auto m = ProcessModel::stable(1, 1.0);
  return m;
}

const RenewalTable& cauchy1_table() {
  static const auto t = normalized_stable_table(cauchy1(), 1.0);
  return t;
}

}  // namespace

TEST_CASE("normalized stable table has V(r) = sqrt(r)") {
  const auto& t = cauchy1_table();
  CHECK(t.V(1.0) == doctest::Approx(1.0).epsilon(2e-3));
  CHECK(t.V(2.0) * t.V(2.0) == doctest::Approx(2.0).epsilon(4e-3));
}

TEST_CASE("scaling assessment") {
  auto st = assess_scaling(cauchy1());
  CHECK(st.global);
  CHECK(st.local);
  auto tr = assess_scaling(ProcessModel::truncated_stable(1, 1.0, 0.5));
  CHECK_FALSE(tr.global);
  CHECK(tr.local);
  CHECK_FALSE(assess_scaling(ProcessModel::subordinate_bm(1, 1.0)).global);
}

TEST_CASE("halfspace survival factor") {
  DirichletBounds b(cauchy1(), cauchy1_table(), Domain::halfspace(1, 0.0));
  const Point x{1.0};
  auto s = b.survival(4.0, x);
  CHECK(s.structural == doctest::Approx(0.5).epsilon(2e-3));
  CHECK(s.regime == SurvivalRegime::AllTime);
  CHECK(s.lower <= s.structural);
  CHECK(s.structural <= s.upper);
  const Point out{-0.5};
  CHECK(b.survival(1.0, out).structural == 0.0);
  CHECK(b.survival(1.0, out).upper == 0.0);
}

TEST_CASE("halfspace kernel factorization") {
  DirichletBounds b(cauchy1(), cauchy1_table(), Domain::halfspace(1, 0.0));
  // two points at distance 1 from the boundary are impossible in d=1 with |x-y|=1; use d=2
  auto m2 = ProcessModel::stable(2, 1.0);
  DirichletBounds b2(m2, normalized_stable_table(m2, 1.0), Domain::halfspace(2, 0.0));
  const Point x{0.0, 1.0}, y{1.0, 1.0};
  auto k = b2.kernel(1.0, x, y);
  // halfspace factors are 1 at t = 1, so F is the free kernel
  CHECK(k.structural == doctest::Approx(1.0 / (2.0 * nm::kPi * std::pow(2.0, 1.5))).epsilon(1e-3));

  const Point x1{1.0}, y1{2.0};
  auto k1 = b.kernel(1.0, x1, y1);
  CHECK(k1.structural == doctest::Approx(1.0 / (2.0 * nm::kPi)).epsilon(1e-3));
  CHECK(k1.structural == doctest::Approx(0.159).epsilon(2e-3));
}

TEST_CASE("kernel is symmetric and vanishes outside") {
  auto m2 = ProcessModel::stable(2, 1.5);
  auto table = normalized_stable_table(m2, 1.5);
  for (const auto& D : {Domain::ball(2, {0.0, 0.0}, 1.0), Domain::halfspace(2, 0.0),
                        Domain::union_two_balls(2, {0.0, 0.0}, {3.0, 0.0}, 1.0)}) {
    DirichletBounds b(m2, table, D);
    const Point x{0.2, 0.3}, y{0.5, 0.1}, out{-5.0, -5.0};
    for (double t : {0.05, 0.5, 5.0}) {
      auto a = b.kernel(t, x, y);
      auto c = b.kernel(t, y, x);
      CHECK(a.structural == c.structural);
      CHECK(a.lower == c.lower);
      CHECK(a.upper == c.upper);
      CHECK(a.lower <= a.structural);
      CHECK(a.structural <= a.upper);
      CHECK(b.kernel(t, x, out).structural == 0.0);
      CHECK(b.kernel(t, out, y).upper == 0.0);
    }
  }
}

TEST_CASE("bounded survival brackets and regimes") {
  DirichletBounds b(cauchy1(), cauchy1_table(), Domain::interval(-1.0, 1.0));
  CHECK(b.t0() == doctest::Approx(1.0).epsilon(3e-3));
  const Point x{0.0};
  double prev = 2.0;
  for (double t : nm::geomspace(1e-3, 50.0, 30)) {
    auto s = b.survival(t, x);
    CHECK(s.lower <= s.structural);
    CHECK(s.structural <= s.upper);
    CHECK(s.structural <= prev);
    prev = s.structural;
    CHECK(s.regime == (t <= b.t0() ? SurvivalRegime::SmallTime : SurvivalRegime::LargeTime));
  }
  // deep points see the "about 1" branch at small times
  DirichletBounds ball(cauchy1(), cauchy1_table(), Domain::ball(1, {0.0}, 1.0));
  for (double xi : {0.0, 0.3, 0.5}) {
    const Point p{xi};
    CHECK(ball.survival(0.01, p).structural >= 0.7);
  }
  b.set_decay_rate(1.1577);
  CHECK(b.decay_rate() == 1.1577);
  CHECK(b.survival(5.0, x).structural == doctest::Approx(std::exp(-1.1577 * 5.0)).epsilon(1e-2));
}

TEST_CASE("regime continuity at t0") {
  auto m = ProcessModel::stable(2, 1.0);
  DirichletBounds b(m, normalized_stable_table(m, 1.0), Domain::ball(2, {0.0, 0.0}, 1.0));
  const Point x{0.1, 0.2}, y{-0.3, 0.4};
  const double t0 = b.t0();
  auto below = b.kernel(t0 * (1 - 1e-9), x, y);
  auto above = b.kernel(t0 * (1 + 1e-9), x, y);
  CHECK(below.regime == SurvivalRegime::SmallTime);
  CHECK(above.regime == SurvivalRegime::LargeTime);
  const double ratio = above.structural / below.structural;
  const auto e = b.eigen_bracket();
  CHECK(ratio <= 1.0 + 1e-6);
  CHECK(ratio >= std::exp(-e.lambda_high * t0) - 1e-6);
}

TEST_CASE("eigen bracket") {
  DirichletBounds b(cauchy1(), cauchy1_table(), Domain::ball(1, {0.0}, 1.0));
  auto e = b.eigen_bracket();
  CHECK(e.inradius == 1.0);
  CHECK(e.diameter == 2.0);
  CHECK(e.lambda_low == doctest::Approx(0.03125).epsilon(5e-3));
  CHECK(e.lambda_low <= e.lambda_high);
  DirichletBounds h(cauchy1(), cauchy1_table(), Domain::halfspace(1, 0.0));
  CHECK_THROWS_AS(h.eigen_bracket(), UnsupportedRegime);
  for (const auto& m : {ProcessModel::stable(2, 0.5), ProcessModel::sum_of_stables(2, 0.5, 1.5),
                        ProcessModel::truncated_stable(2, 1.0, 0.0)}) {
    auto t = build_renewal_table(m, RenewalBackend::HProxy, RenewalGrid{-3, 3, 8});
    for (const auto& D : {Domain::ball(2, {0.0, 0.0}, 0.4), Domain::union_two_balls(2, {0.0, 0.0}, {0.45, 0.0}, 0.15)}) {
      auto eb = DirichletBounds(m, t, D).eigen_bracket();
      CHECK(eb.lambda_low > 0.0);
      CHECK(eb.lambda_low <= eb.lambda_high);
    }
  }
}

TEST_CASE("exit time envelope") {
  DirichletBounds b(cauchy1(), cauchy1_table(), Domain::ball(1, {0.0}, 1.0));
  const Point c{0.0};
  auto e = b.exit_time(c);
  CHECK(e.upper == doctest::Approx(4.0).epsilon(5e-3));
  const Point out{3.0};
  CHECK(b.exit_time(out).lower == 0.0);
  CHECK(b.exit_time(out).upper == 0.0);
  DirichletBounds iv(cauchy1(), cauchy1_table(), Domain::interval(-1.0, 1.0));
  for (double xi : nm::linspace(-0.95, 0.95, 10)) {
    const Point p{xi};
    auto v = iv.exit_time(p);
    CHECK(v.lower > 0.0);
    CHECK(v.lower <= v.upper);
  }
  DirichletBounds h(cauchy1(), cauchy1_table(), Domain::halfspace(1, 0.0));
  CHECK_THROWS_AS(h.exit_time(c), UnsupportedRegime);
}

TEST_CASE("unsupported regimes name the missing hypothesis") {
  auto tr = ProcessModel::truncated_stable(2, 1.0, 0.5);
  auto table = build_renewal_table(tr, RenewalBackend::HProxy, RenewalGrid{-3, 3, 8});
  DirichletBounds hs(tr, table, Domain::halfspace(2, 0.0));
  const Point x{0.0, 0.05};
  CHECK_NOTHROW(hs.survival(1e-4, x));
  try {
    (void)hs.survival(1e3, x);
    FAIL("expected UnsupportedRegime");
  } catch (const UnsupportedRegime& e) {
    CHECK(std::string(e.hypothesis()).find("global") != std::string::npos);
  }
  try {
    DirichletBounds ext(tr, table, Domain::exterior_ball(2, {0.0, 0.0}, 1.0));
    FAIL("expected UnsupportedRegime");
  } catch (const UnsupportedRegime& e) {
    CHECK_FALSE(std::string(e.hypothesis()).empty());
  }
  // truncated jumps cannot cross a domain wider than the support
  CHECK_THROWS_AS(DirichletBounds(tr, table, Domain::ball(2, {0.0, 0.0}, 1.0)), UnsupportedRegime);
  // overlapping balls are not C^{1,1}
  auto m = ProcessModel::stable(2, 1.0);
  auto mt = normalized_stable_table(m, 1.0);
  CHECK_THROWS_AS(DirichletBounds(m, mt, Domain::union_two_balls(2, {0.0, 0.0}, {1.0, 0.0}, 1.0)), UnsupportedRegime);
  // transience fails in d=1 for alpha=1
  CHECK_THROWS_AS(DirichletBounds(cauchy1(), cauchy1_table(), Domain::exterior_ball(1, {0.0}, 1.0)), UnsupportedRegime);
}

TEST_CASE("exterior ball envelope") {
  auto m = ProcessModel::stable(3, 1.0);
  DirichletBounds b(m, normalized_stable_table(m, 1.0), Domain::exterior_ball(3, {0.0, 0.0, 0.0}, 1.0));
  const Point x{0.0, 0.0, 1.5}, y{0.0, 2.0, 0.0};
  for (double t : {0.01, 1.0, 100.0}) {
    auto s = b.survival(t, x);
    CHECK(s.regime == SurvivalRegime::AllTime);
    CHECK(s.structural > 0.0);
    CHECK(s.structural <= 1.0);
    auto k = b.kernel(t, x, y);
    CHECK(k.lower <= k.structural);
    CHECK(k.structural <= k.upper);
  }
  // long-time survival stays bounded below in the transient case
  CHECK(b.survival(1e4, x).structural == doctest::Approx(std::sqrt(0.5)).epsilon(5e-3));
}

TEST_CASE("calibrated constants widen the envelope") {
  ConstantProfile p;
  p.name = "wide";
  p.survival_lower = 0.25;
  p.survival_upper = 3.0;
  p.factorization_lower = 0.1;
  p.factorization_upper = 8.0;
  p.eigen_c = 4.0;
  DirichletBounds b(cauchy1(), cauchy1_table(), Domain::halfspace(1, 0.0), p);
  const Point x{1.0};
  auto s = b.survival(4.0, x);
  CHECK(s.lower == doctest::Approx(0.25 * s.structural));
  CHECK(s.upper == doctest::Approx(3.0 * s.structural));
  p.survival_lower = 1.5;
  CHECK_THROWS_AS(DirichletBounds(cauchy1(), cauchy1_table(), Domain::halfspace(1, 0.0), p), ConfigError);
}

TEST_CASE("V-product inequality on a grid") {
  const auto& table = cauchy1_table();
  auto tr = ProcessModel::truncated_stable(1, 1.0, 0.5);
  const auto tt = build_renewal_table(tr, RenewalBackend::HProxy, RenewalGrid{-3, 3, 8});
  for (const RenewalTable* tab : {&table, &tt}) {
    for (double t0 : {0.01, 1.0}) {
      for (double r : nm::geomspace(1e-2, 10.0, 7)) {
        for (double lam : {1.0, 2.0, 5.0}) {
          for (double t : {2 * t0, 10 * t0, 100 * t0}) {
            auto v = v_product(*tab, t0, r, lam, t);
            CHECK(v.left <= v.middle * (1 + 1e-12));
            CHECK(v.middle <= v.right * (1 + 1e-12));
          }
        }
      }
    }
  }
  CHECK_THROWS_AS(v_product(table, 1.0, 1.0, 0.5, 2.0), DomainError);
}

TEST_CASE("dilation stability for balls") {
  auto m = ProcessModel::stable(2, 1.0);
  auto table = normalized_stable_table(m, 1.0);
  const double R = 4.0;
  DirichletBounds unit(m, table, Domain::ball(2, {0.0, 0.0}, 1.0));
  DirichletBounds big(m, table, Domain::ball(2, {0.0, 0.0}, R));
  // V(R r) = sqrt(R) V(r), so time scales by R
  for (double t : {0.05, 0.4}) {
    const Point x{0.3, 0.2}, xR{0.3 * R, 0.2 * R};
    CHECK(big.survival(t * R, xR).structural == doctest::Approx(unit.survival(t, x).structural).epsilon(5e-3));
  }
}

TEST_CASE("kernel envelope CSV") {
  DirichletBounds b(cauchy1(), cauchy1_table(), Domain::interval(-1.0, 1.0));
  std::ostringstream out;
  const std::vector<double> times{0.1, 2.0};
  const std::vector<Point> xs{{0.0}, {0.5}};
  const std::vector<Point> ys{{-0.2}};
  b.write_csv(out, times, xs, ys);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,x0,y0,F,lower,upper,regime");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 6);
  }
  CHECK(rows == 4);
  CHECK(out.str().find("large-time") != std::string::npos);
}
