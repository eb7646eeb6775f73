#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace heatlab::numerics {

using RealFn = std::function<double(double)>;

inline constexpr double kPi = 3.14159265358979323846;

/// Surface area of the unit sphere in R^d.
double sphere_area(int d);

/// Adaptive Gauss-Kronrod (61 point) on a finite interval.
double gauss_kronrod(const RealFn& f, double a, double b, double rel_tol, double* abs_err = nullptr);

/// Integral over [a, b] (b may be +inf). The range is cut at `breaks` and at
/// decades so integrands spanning many scales are resolved; an interval
/// starting at 0 uses tanh-sinh on its first piece and the unbounded tail
/// uses exp-sinh.
double integrate(const RealFn& f, double a, double b, std::span<const double> breaks,
                 double rel_tol);

/// Wynn epsilon accelerator fed with partial sums.
class WynnEpsilon {
 public:
  void push(double partial_sum);
  double estimate() const { return estimate_; }
  double error() const { return error_; }
  std::size_t count() const { return count_; }

 private:
  std::vector<double> diag_;
  std::vector<double> history_;
  double estimate_ = 0.0;
  double error_ = 0.0;
  std::size_t count_ = 0;
};

struct SeriesResult {
  double value = 0.0;
  double abs_error = 0.0;
  int terms = 0;
  bool converged = false;
  std::vector<double> partial_sums;
};

/// Sum of term(k) for k = 0, 1, ... with Wynn acceleration. Stops when either
/// the raw partial sums or the accelerated estimate settle to rel_tol, or when
/// `negligible(k)` reports that all remaining terms vanish (abs_error is then 0).
SeriesResult accelerated_sum(const std::function<double(int)>& term, double rel_tol,
                             double abs_floor, int max_terms,
                             const std::function<bool(int)>& negligible = {});

/// k-th positive zero (k >= 1) of J_0, cached.
double bessel_j0_zero(int k);

/// Geometric grid of n points from lo to hi inclusive.
std::vector<double> geomspace(double lo, double hi, std::size_t n);
std::vector<double> linspace(double lo, double hi, std::size_t n);

}  // namespace heatlab::numerics
