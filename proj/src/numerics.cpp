#include "heatlab/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace heatlab::numerics {

namespace {

constexpr std::size_t kWynnDepth = 40;
constexpr unsigned kGkDepth = 12;

double tanh_sinh_segment(const RealFn& f, double a, double b, double rel_tol, double* err) {
  thread_local boost::math::quadrature::tanh_sinh<double> integrator(12);
  double error = 0.0;
  double l1 = 0.0;
  auto g = [&f](double x) { return f(x); };
  double v = integrator.integrate(g, a, b, rel_tol, &error, &l1);
  if (err) *err = error;
  return v;
}

double exp_sinh_tail(const RealFn& f, double a, double rel_tol) {
  thread_local boost::math::quadrature::exp_sinh<double> integrator(12);
  auto g = [&f](double x) { return f(x); };
  return integrator.integrate(g, a, std::numeric_limits<double>::infinity(), rel_tol);
}

// Geometric pieces so that no piece spans more than one decade.
double decade_segments(const RealFn& f, double p, double q, double rel_tol) {
  double total = 0.0;
  double lo = p;
  while (lo < q) {
    double hi = std::min(q, lo * 10.0);
    if (q / hi < 1.5) hi = q;
    total += gauss_kronrod(f, lo, hi, rel_tol);
    lo = hi;
  }
  return total;
}

double finite_segment(const RealFn& f, double p, double q, double rel_tol) {
  if (q <= p) return 0.0;
  if (p == 0.0) {
    double err = 0.0;
    double v = tanh_sinh_segment(f, 0.0, q, rel_tol, &err);
    if (std::isfinite(v) && err <= 10.0 * rel_tol * std::abs(v) + 1e-300) return v;
    // fall back to an explicit multi-scale split near zero
    double cut = q * 1e-12;
    return tanh_sinh_segment(f, 0.0, cut, rel_tol, nullptr) + decade_segments(f, cut, q, rel_tol);
  }
  return decade_segments(f, p, q, rel_tol);
}

}  // namespace

double sphere_area(int d) {
  return 2.0 * std::pow(kPi, 0.5 * d) / boost::math::tgamma(0.5 * d);
}

double gauss_kronrod(const RealFn& f, double a, double b, double rel_tol, double* abs_err) {
  if (b <= a) {
    if (abs_err) *abs_err = 0.0;
    return 0.0;
  }
  // Boost 1.74 compares an error estimate in [-1,1] units against a tolerance
  // in [a,b] units, so the map to [-1,1] is done here.
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double error = 0.0;
  auto g = [&f, mid, half](double x) { return f(mid + half * x); };
  double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, -1.0, 1.0, kGkDepth,
                                                                          rel_tol, &error);
  if (abs_err) *abs_err = error * half;
  return v * half;
}

double integrate(const RealFn& f, double a, double b, std::span<const double> breaks,
                 double rel_tol) {
  if (!(b > a)) return 0.0;
  std::vector<double> pts{a};
  for (double br : breaks) {
    if (br > a && br < b) pts.push_back(br);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const bool unbounded = std::isinf(b);
  if (!unbounded) pts.push_back(b);

  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) total += finite_segment(f, pts[i], pts[i + 1], rel_tol);
  if (unbounded) {
    double last = pts.back();
    if (last == 0.0) {
      total += finite_segment(f, 0.0, 1.0, rel_tol);
      last = 1.0;
    }
    total += exp_sinh_tail(f, last, rel_tol);
  }
  return total;
}

void WynnEpsilon::push(double partial_sum) {
  ++count_;
  std::vector<double> next(std::min(diag_.size() + 1, kWynnDepth));
  next[0] = partial_sum;
  std::size_t len = 1;
  for (std::size_t k = 1; k < next.size(); ++k) {
    double diff = next[k - 1] - diag_[k - 1];
    if (diff == 0.0 || !std::isfinite(diff)) break;
    double prev2 = k >= 2 ? diag_[k - 2] : 0.0;
    next[k] = prev2 + 1.0 / diff;
    if (!std::isfinite(next[k])) break;
    len = k + 1;
  }
  next.resize(len);
  diag_ = std::move(next);

  std::size_t top = (len - 1) & ~std::size_t{1};
  estimate_ = diag_[top];
  history_.push_back(estimate_);
  const std::size_t n = history_.size();
  if (n >= 3) {
    error_ = std::abs(history_[n - 1] - history_[n - 2]) + std::abs(history_[n - 1] - history_[n - 3]);
  } else if (n == 2) {
    error_ = 2.0 * std::abs(history_[1] - history_[0]);
  } else {
    error_ = std::numeric_limits<double>::infinity();
  }
}

SeriesResult accelerated_sum(const std::function<double(int)>& term, double rel_tol,
                             double abs_floor, int max_terms,
                             const std::function<bool(int)>& negligible) {
  SeriesResult out;
  WynnEpsilon wynn;
  double sum = 0.0;
  int small_run = 0;
  for (int k = 0; k < max_terms; ++k) {
    double t = term(k);
    sum += t;
    out.partial_sums.push_back(sum);
    wynn.push(sum);
    out.terms = k + 1;
    if (negligible && negligible(k)) {
      out.value = sum;
      out.abs_error = 0.0;
      out.converged = true;
      return out;
    }
    if (k >= 1 && std::abs(t) <= rel_tol * std::abs(sum) + abs_floor) {
      if (++small_run >= 2) {
        out.value = sum;
        out.abs_error = std::abs(t);
        out.converged = true;
        return out;
      }
    } else {
      small_run = 0;
    }
    if (k >= 8 && wynn.error() <= rel_tol * std::abs(wynn.estimate()) + abs_floor) {
      out.value = wynn.estimate();
      out.abs_error = wynn.error();
      out.converged = true;
      return out;
    }
  }
  out.value = wynn.estimate();
  out.abs_error = wynn.error();
  out.converged = false;
  return out;
}

double bessel_j0_zero(int k) {
  static std::once_flag once;
  static std::vector<double> cache;
  constexpr int kCached = 4096;
  std::call_once(once, [] {
    cache.resize(kCached);
    boost::math::cyl_bessel_j_zero(0.0, 1, kCached, cache.begin());
  });
  if (k >= 1 && k <= kCached) return cache[static_cast<std::size_t>(k - 1)];
  return boost::math::cyl_bessel_j_zero(0.0, k);
}

std::vector<double> geomspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  const double llo = std::log(lo);
  const double step = (std::log(hi) - llo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(llo + step * static_cast<double>(i));
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) out[i] = lo + step * static_cast<double>(i);
  out.back() = hi;
  return out;
}

}  // namespace heatlab::numerics
