#include "heatlab/free_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <boost/math/special_functions/bessel.hpp>

#include "heatlab/errors.hpp"
#include "heatlab/numerics.hpp"

namespace heatlab {

namespace nm = numerics;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kQuadTol = 1e-11;

double mul0(double a, double b) {
  const double v = a * b;
  return std::isfinite(v) ? v : 0.0;
}

// Frequency s with psi(s) = level, by bisection in log s.
double frequency_at(const ProcessModel& m, double level) {
  const double target = std::log(level);
  double lo = -690.0, hi = 690.0;
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (m.log_psi(std::exp(mid)) < target) lo = mid;
    else hi = mid;
  }
  return std::exp(0.5 * (lo + hi));
}

// Oscillating factor and its zeros for the radial inversion in dimension d.
double wave(int d, double w) {
  if (d == 1) return std::cos(w);
  if (d == 2) return boost::math::cyl_bessel_j(0, w);
  return std::sin(w);
}

double wave_zero(int d, int k) {
  if (d == 1) return (k - 0.5) * nm::kPi;
  if (d == 2) return nm::bessel_j0_zero(k);
  return k * nm::kPi;
}

double prefactor(int d, double r) {
  if (d == 1) return 1.0 / nm::kPi;
  if (d == 2) return 1.0 / (2.0 * nm::kPi);
  return 1.0 / (2.0 * nm::kPi * nm::kPi * r);
}

void require_time(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("time must be positive and finite");
}

}  // namespace

std::string to_string(KernelRegime regime) { return regime == KernelRegime::Near ? "near" : "far"; }

bool hartman_wintner_holds(const ProcessModel& model) {
  const auto us = nm::geomspace(1e6, 1e12, 7);
  double prev = 0.0;
  for (double u : us) {
    const double q = model.psi_fast(u) / std::log(u);
    if (!(q > prev)) return false;
    prev = q;
  }
  return prev >= 1.5 * model.psi_fast(1e6) / std::log(1e6);
}

void require_hartman_wintner(const ProcessModel& model) {
  if (!hartman_wintner_holds(model)) {
    throw UnsupportedRegime("psi(u)/log u does not grow on [1e6, 1e12]; the density may be unbounded",
                            "Hartman-Wintner");
  }
}

KernelValue p_free_detailed(const ProcessModel& model, double t, double r, const KernelOptions& options) {
  require_time(t);
  if (r < 0.0) throw DomainError("radius must be nonnegative");
  const int d = model.dimension();
  const double s_char = frequency_at(model, 1.0 / t);
  const double s_max = frequency_at(model, options.cutoff / t);
  std::vector<double> breaks;
  for (double s = s_char; s < s_max; s *= 4.0) breaks.push_back(s);
  breaks.push_back(s_max);

  KernelValue out;
  if (r == 0.0) {
    out.value = p0(model, t, options);
    return out;
  }
  auto amp = [&](double s) { return mul0(std::exp(-t * model.psi_fast(s)), d == 1 ? 1.0 : s); };
  auto f = [&](double s) { return amp(s) * wave(d, s * r); };
  auto term = [&](int k) {
    const double a = k == 0 ? 0.0 : wave_zero(d, k) / r;
    const double b = std::min(wave_zero(d, k + 1) / r, s_max);
    if (a >= b) return 0.0;
    std::vector<double> inner;
    for (double x : breaks) {
      if (x > a && x < b) inner.push_back(x);
    }
    return nm::integrate(f, a, b, inner, kQuadTol);
  };
  auto negligible = [&](int k) { return wave_zero(d, k + 1) / r >= s_max; };
  const double first = std::abs(term(0));
  auto res = nm::accelerated_sum(term, 0.1 * options.rel_tol, 1e-14 * first, options.max_intervals, negligible);
  const double pre = prefactor(d, r);
  out.value = pre * res.value;
  out.abs_error = pre * res.abs_error;
  out.intervals = res.terms;
  out.converged = res.converged;
  return out;
}

double p_free(const ProcessModel& model, double t, double r, const KernelOptions& options) {
  const auto v = p_free_detailed(model, t, r, options);
  const double rel = v.value != 0.0 ? v.abs_error / std::abs(v.value) : kInf;
  if (!v.converged || (v.abs_error > 0.0 && rel > 100.0 * options.rel_tol)) {
    throw AccuracyWarning("free kernel at t=" + std::to_string(t) + ", r=" + std::to_string(r) +
                              " is not resolved by the frequency cutoff",
                          rel);
  }
  return std::max(v.value, 0.0);
}

double p0(const ProcessModel& model, double t, const KernelOptions& options) {
  require_time(t);
  const int d = model.dimension();
  const double s_char = frequency_at(model, 1.0 / t);
  const double s_max = frequency_at(model, options.cutoff / t);
  std::vector<double> breaks;
  for (double s = s_char; s < s_max; s *= 4.0) breaks.push_back(s);
  auto f = [&](double s) { return mul0(std::exp(-t * model.psi_fast(s)), std::pow(s, d - 1)); };
  const double integral = nm::integrate(f, 0.0, s_max, breaks, kQuadTol);
  return nm::sphere_area(d) * integral / std::pow(2.0 * nm::kPi, d);
}

KernelEnvelope p_free_envelope(const ProcessModel& model, const RenewalTable& table, double t, double r,
                               const EnvelopeConstants& constants, double theta) {
  require_time(t);
  if (r < 0.0) throw DomainError("radius must be nonnegative");
  const int d = model.dimension();
  if (theta > 0.0) {
    const double window_t = std::pow(table.V(1.0 / theta), 2);
    if (t >= window_t || r >= 1.0 / theta) {
      throw UnsupportedRegime("envelope is only valid for t < " + std::to_string(window_t) +
                                  " and r < " + std::to_string(1.0 / theta),
                              "local scaling window");
    }
  }
  KernelEnvelope env;
  env.profile = constants.profile;
  env.near_branch = std::pow(table.Vinverse(std::sqrt(t)), -static_cast<double>(d));
  if (r == 0.0) {
    env.far_branch = kInf;
    env.regime = KernelRegime::Near;
  } else {
    const double v = table.V(r);
    env.far_branch = t / (v * v * std::pow(r, d));
    env.regime = t > v * v ? KernelRegime::Near : KernelRegime::Far;
  }
  const double base = std::min(env.near_branch, env.far_branch);
  env.lower = constants.lower * base;
  env.upper = constants.upper * base;
  return env;
}

GRResult check_GR(const ProcessModel& model, const RenewalTable& table, double R, const GRGrid& grid) {
  if (!(R > 0.0)) throw DomainError("check_GR needs R > 0");
  const int d = model.dimension();
  GRResult out;
  out.holds = true;
  for (double r : nm::geomspace(R * grid.r_ratio_min, R, grid.radii)) {
    const double v2 = std::pow(table.V(r), 2);
    for (double t : nm::geomspace(grid.t_ratio_min * v2, v2, grid.times)) {
      const double lhs = t / (v2 * std::pow(r, d));
      double p = 0.0;
      try {
        p = p_free(model, t, r);
      } catch (const AccuracyWarning&) {
        p = 0.0;
      }
      const double c = p > 0.0 ? lhs / p : kInf;
      if (c > out.constant) {
        out.constant = c;
        out.t = t;
        out.r = r;
      }
      if (!(c <= grid.ceiling)) {
        out.holds = false;
        out.constant = kInf;
        out.t = t;
        out.r = r;
        return out;
      }
    }
  }
  out.constant = std::max(out.constant, 1.0);
  return out;
}

double measure_upper_constant(const ProcessModel& model, const RenewalTable& table, std::span<const double> times,
                              std::span<const double> radii) {
  const int d = model.dimension();
  double sup = 0.0;
  for (double t : times) {
    for (double r : radii) {
      const double v = table.V(r);
      sup = std::max(sup, p_free(model, t, r) * std::pow(r, d) * v * v / t);
    }
  }
  return sup;
}

double measure_small_time_constant(const ProcessModel& model, std::span<const double> radii,
                                   std::span<const double> candidates, std::size_t times) {
  const int d = model.dimension();
  const double factor = std::pow(4.0, -d - 1.0);
  std::vector<double> sorted(candidates.begin(), candidates.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  for (double c : sorted) {
    bool ok = true;
    for (double y : radii) {
      const double t_hi = c / model.psi(1.0 / y);
      const double nu = model.nu(y);
      for (double t : nm::geomspace(t_hi * 1e-3, t_hi * (1.0 - 1e-9), times)) {
        double p = 0.0;
        try {
          p = p_free(model, t, y);
        } catch (const AccuracyWarning&) {
          p = 0.0;
        }
        if (p < factor * t * nu) {
          ok = false;
          break;
        }
      }
      if (!ok) break;
    }
    if (ok) return c;
  }
  return 0.0;
}

void write_kernel_slice(std::ostream& out, const ProcessModel& model, const RenewalTable& table, double t,
                        std::span<const double> radii, const EnvelopeConstants& constants) {
  out << "t,r,p,lower,upper,regime\n";
  char buf[256];
  for (double r : radii) {
    const auto env = p_free_envelope(model, table, t, r, constants);
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%s\n", t, r, p_free(model, t, r), env.lower,
                  env.upper, to_string(env.regime).c_str());
    out << buf;
  }
}

}  // namespace heatlab
