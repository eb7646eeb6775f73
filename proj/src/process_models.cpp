#include "heatlab/process_models.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <mutex>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "heatlab/errors.hpp"
#include "heatlab/numerics.hpp"

namespace heatlab {

namespace nm = numerics;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPsiTol = 1e-10;
constexpr double kTableLog10Min = -10.0;
constexpr double kTableLog10Max = 10.0;
constexpr int kTablePerDecade = 32;

double ipow(double s, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= s;
  return r;
}

// Double-exponential rules sample abscissas within 1e-300 of an endpoint
// where products of a vanishing and a blowing-up factor over/underflow; the
// quadrature weight there is negligible so such samples count as zero.
double mul0(double a, double b) {
  const double v = a * b;
  return std::isfinite(v) ? v : 0.0;
}

// 1 - Lambda_d(w), where Lambda_d is the radial Fourier transform of the
// uniform measure on the unit sphere.
double one_minus_lambda(int d, double w) {
  if (d == 1) {
    double s = std::sin(0.5 * w);
    return 2.0 * s * s;
  }
  if (d == 2) {
    if (w < 2.0) {
      // -sum_{k>=1} (-(w/2)^2)^k / (k!)^2
      const double q = 0.25 * w * w;
      double term = 1.0;
      double sum = 0.0;
      for (int k = 1; k < 40; ++k) {
        term *= -q / (static_cast<double>(k) * k);
        sum -= term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
      }
      return sum;
    }
    return 1.0 - boost::math::cyl_bessel_j(0, w);
  }
  if (w < 1.0) {
    const double q = w * w;
    double term = 1.0;
    double sum = 0.0;
    for (int k = 1; k < 30; ++k) {
      term *= -q / ((2.0 * k) * (2.0 * k + 1.0));
      sum -= term;
      if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
  }
  return 1.0 - std::sin(w) / w;
}

double lambda_d(int d, double w) {
  if (d == 1) return std::cos(w);
  if (d == 2) return boost::math::cyl_bessel_j(0, w);
  return w == 0.0 ? 1.0 : std::sin(w) / w;
}

// k-th positive zero (k >= 1) of Lambda_d.
double lambda_zero(int d, int k) {
  if (d == 1) return (k - 0.5) * nm::kPi;
  if (d == 2) return nm::bessel_j0_zero(k);
  return k * nm::kPi;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void require_dimension(int d) {
  if (d < 1 || d > 3) throw ModelInvalid("dimension must be 1, 2 or 3, got " + std::to_string(d));
}

void require_alpha(double a, const char* name) {
  if (!(a > 0.0 && a < 2.0)) throw ModelInvalid(std::string(name) + " must lie in (0,2), got " + fmt(a));
}

}  // namespace

namespace detail {

class ModelImpl {
 public:
  ModelImpl(ModelParams p, std::string label) : params(p), label(std::move(label)) {}
  virtual ~ModelImpl() = default;

  ModelParams params;
  std::string label;
  std::vector<double> breaks;
  double support = kInf;

  virtual double nu(double s) const = 0;
  virtual std::optional<double> log_psi_closed(double) const { return std::nullopt; }
  virtual std::optional<std::complex<double>> log_psi_complex(std::complex<double>) const {
    return std::nullopt;
  }
  virtual std::optional<double> tail_closed(double) const { return std::nullopt; }
  virtual std::optional<double> moment_closed(double) const { return std::nullopt; }

  int d() const { return params.dimension; }

  virtual double psi_quadrature(double u) const {
    const int dim = d();
    const double omega = nm::sphere_area(dim);
    const double s_first = lambda_zero(dim, 1) / u;
    auto near = [&](double s) {
      return mul0(one_minus_lambda(dim, u * s), mul0(nu(s), ipow(s, dim - 1)));
    };
    const double near_hi = std::min(s_first, support);
    const double body = nm::integrate(near, 0.0, near_hi, breaks, kPsiTol);
    if (s_first >= support) return omega * body;

    auto g = [&](double s) { return mul0(nu(s), ipow(s, dim - 1)); };
    const double tail = nm::integrate(g, s_first, support, breaks, kPsiTol);
    auto term = [&](int k) {
      double a = lambda_zero(dim, k + 1) / u;
      double b = lambda_zero(dim, k + 2) / u;
      if (a >= support) return 0.0;
      b = std::min(b, support);
      auto osc = [&](double s) { return mul0(lambda_d(dim, u * s), g(s)); };
      return nm::integrate(osc, a, b, breaks, kPsiTol);
    };
    auto negligible = [&](int k) { return lambda_zero(dim, k + 2) / u >= support; };
    auto res = nm::accelerated_sum(term, 1e-11, 1e-13 * (body + tail), 20000, negligible);
    if (!res.converged) {
      throw QuadratureError("psi quadrature did not converge at u=" + fmt(u), res.partial_sums);
    }
    return omega * (body + tail - res.value);
  }

  double psi(double u) const {
    if (u == 0.0) return 0.0;
    if (auto lp = log_psi_closed(u)) return std::exp(*lp);
    return psi_quadrature(u);
  }

  double log_psi(double u) const {
    if (u <= 0.0) return -kInf;
    if (auto lp = log_psi_closed(u)) return *lp;
    std::call_once(table_once_, [this] { build_table(); });
    const double x = std::log(u);
    if (x < x_lo_) return table_lo_value_ + slope_lo_ * (x - x_lo_);
    if (x > x_hi_) return table_hi_value_ + slope_hi_ * (x - x_hi_);
    return (*spline_)(x);
  }

  double tail(double r) const {
    if (auto v = tail_closed(r)) return *v;
    if (r >= support) return 0.0;
    const int dim = d();
    auto g = [&](double s) { return mul0(nu(s), ipow(s, dim - 1)); };
    return nm::sphere_area(dim) * nm::integrate(g, r, support, breaks, 1e-10);
  }

  double moment(double r) const {
    if (auto v = moment_closed(r)) return *v;
    const int dim = d();
    auto g = [&](double s) { return mul0(nu(s), ipow(s, dim + 1)); };
    return nm::sphere_area(dim) * nm::integrate(g, 0.0, std::min(r, support), breaks, 1e-10);
  }

 private:
  void build_table() const {
    const int n = static_cast<int>((kTableLog10Max - kTableLog10Min) * kTablePerDecade) + 1;
    const double h = std::log(10.0) / kTablePerDecade;
    std::vector<double> y(static_cast<std::size_t>(n));
    x_lo_ = kTableLog10Min * std::log(10.0);
    for (int i = 0; i < n; ++i) {
      double u = std::exp(x_lo_ + h * i);
      double p = psi_quadrature(u);
      if (!(p > 0.0) || !std::isfinite(p)) {
        throw ModelInvalid("psi is not positive and finite at u=" + fmt(u));
      }
      y[static_cast<std::size_t>(i)] = std::log(p);
    }
    x_hi_ = x_lo_ + h * (n - 1);
    constexpr int kSlopeSpan = 8;
    table_lo_value_ = y.front();
    table_hi_value_ = y.back();
    slope_lo_ = (y[kSlopeSpan] - y[0]) / (kSlopeSpan * h);
    slope_hi_ = (y[static_cast<std::size_t>(n - 1)] - y[static_cast<std::size_t>(n - 1 - kSlopeSpan)]) /
                (kSlopeSpan * h);
    spline_ = std::make_unique<boost::math::interpolators::cardinal_cubic_b_spline<double>>(
        y.begin(), y.end(), x_lo_, h);
  }

  mutable std::once_flag table_once_;
  mutable std::unique_ptr<boost::math::interpolators::cardinal_cubic_b_spline<double>> spline_;
  mutable double x_lo_ = 0.0, x_hi_ = 0.0;
  mutable double table_lo_value_ = 0.0, table_hi_value_ = 0.0;
  mutable double slope_lo_ = 0.0, slope_hi_ = 0.0;
};

namespace {

struct PowerTerm {
  double alpha;
  double psi_scale;
};

// psi(u) = sum_i c_i u^{alpha_i}; nu and L in closed form.
class PowerLawImpl final : public ModelImpl {
 public:
  PowerLawImpl(ModelParams p, std::string label, std::vector<PowerTerm> terms)
      : ModelImpl(p, std::move(label)), terms_(std::move(terms)) {
    for (const auto& t : terms_) nu_coef_.push_back(t.psi_scale * stable_nu_constant(d(), t.alpha));
  }

  double nu(double s) const override {
    double v = 0.0;
    for (std::size_t i = 0; i < terms_.size(); ++i) v += nu_coef_[i] * std::pow(s, -d() - terms_[i].alpha);
    return v;
  }

  std::optional<double> log_psi_closed(double u) const override {
    if (u <= 0.0) return -kInf;
    const double lu = std::log(u);
    double m = -kInf;
    std::vector<double> l(terms_.size());
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      l[i] = std::log(terms_[i].psi_scale) + terms_[i].alpha * lu;
      m = std::max(m, l[i]);
    }
    double acc = 0.0;
    for (double li : l) acc += std::exp(li - m);
    return m + std::log(acc);
  }

  std::optional<std::complex<double>> log_psi_complex(std::complex<double> z) const override {
    const std::complex<double> lz = std::log(z);
    std::vector<std::complex<double>> l(terms_.size());
    std::size_t top = 0;
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      l[i] = std::log(terms_[i].psi_scale) + terms_[i].alpha * lz;
      if (l[i].real() > l[top].real()) top = i;
    }
    std::complex<double> acc = 0.0;
    for (std::size_t i = 0; i < l.size(); ++i) {
      if (i != top) acc += std::exp(l[i] - l[top]);
    }
    return l[top] + std::log(1.0 + acc);
  }

  std::optional<double> tail_closed(double r) const override {
    double v = 0.0;
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      v += nu_coef_[i] * std::pow(r, -terms_[i].alpha) / terms_[i].alpha;
    }
    return nm::sphere_area(d()) * v;
  }

  std::optional<double> moment_closed(double r) const override {
    double v = 0.0;
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      v += nu_coef_[i] * std::pow(r, 2.0 - terms_[i].alpha) / (2.0 - terms_[i].alpha);
    }
    return nm::sphere_area(d()) * v;
  }

 private:
  std::vector<PowerTerm> terms_;
  std::vector<double> nu_coef_;
};

class TruncatedImpl final : public ModelImpl {
 public:
  using ModelImpl::ModelImpl;
  double nu(double s) const override {
    if (s >= 1.0) return 0.0;
    const double base = std::pow(s, -d() - params.alpha);
    if (params.beta == 0.0) return base;
    return std::pow(std::log1p(1.0 / s), params.beta) * base;
  }
};

class SubordinateImpl final : public ModelImpl {
 public:
  using ModelImpl::ModelImpl;

  // Subordination integral int_0^1 (4 pi r)^{-d/2} e^{-s^2/(4r)} r^{-1-alpha/2} dr
  // after the substitution w = s^2/(4r).
  double nu(double s) const override {
    const double a = 0.5 * params.alpha;
    const double k = 0.5 * d() + a;
    const double lo = 0.25 * s * s;
    auto f = [k](double w) { return w > 700.0 ? 0.0 : std::pow(w, k - 1.0) * std::exp(-w); };
    const double peak[] = {std::max(k - 1.0, 0.0) + 1.0};
    const double integral = nm::integrate(f, lo, kInf, peak, 1e-11);
    return std::pow(nm::kPi, -0.5 * d()) * std::pow(4.0, a) * std::pow(s, -d() - params.alpha) * integral;
  }

  // L(r) and the truncated second moment by Fubini over the subordinator
  // time: |B_t|^2 / (2t) is chi-square with d degrees of freedom.
  std::optional<double> tail_closed(double r) const override {
    const double a = 0.5 * params.alpha;
    const double k = 0.5 * d();
    const double x = 0.25 * r * r;
    auto f = [=](double t) {
      return mul0(boost::math::gamma_q(k, x / t), std::pow(t, -1.0 - a));
    };
    const double br[] = {std::min(x, 0.5)};
    return nm::integrate(f, 0.0, 1.0, br, 1e-11);
  }

  std::optional<double> moment_closed(double r) const override {
    const double a = 0.5 * params.alpha;
    const double k = 0.5 * d();
    const double x = 0.25 * r * r;
    const int dim = d();
    auto f = [=](double t) {
      return 2.0 * dim * t * mul0(boost::math::gamma_p(k + 1.0, x / t), std::pow(t, -1.0 - a));
    };
    const double br[] = {std::min(x, 0.5)};
    return nm::integrate(f, 0.0, 1.0, br, 1e-11);
  }

  // psi(u) = phi(u^2) with phi the subordinator Laplace exponent.
  double psi_quadrature(double u) const override {
    const double lam = u * u;
    const double a = 0.5 * params.alpha;
    auto f = [lam, a](double r) { return mul0(-std::expm1(-lam * r), std::pow(r, -1.0 - a)); };
    std::vector<double> br;
    if (lam > 1.0) br.push_back(1.0 / lam);
    return nm::integrate(f, 0.0, 1.0, br, 1e-12);
  }
};

class ProfileImpl final : public ModelImpl {
 public:
  using ModelImpl::ModelImpl;
  double nu(double s) const override {
    const double a1 = params.alpha;
    double f = 0.0;
    switch (params.profile) {
      case NuProfile::Piecewise:
        f = s <= 1.0 ? std::pow(s, -a1) : 0.5 * std::pow(s, -params.alpha2);
        break;
      case NuProfile::LogRatio:
        f = std::pow(std::log(s + 1.0 / s) / s, a1);
        break;
      case NuProfile::InverseLog:
        f = std::pow(s * std::log(s + 1.0 / s), -a1);
        break;
    }
    return f * std::pow(s, -d());
  }
};

class CustomImpl final : public ModelImpl {
 public:
  CustomImpl(ModelParams p, std::string label, std::function<double(double)> f)
      : ModelImpl(p, std::move(label)), f_(std::move(f)) {}
  double nu(double s) const override { return s >= support ? 0.0 : f_(s); }

 private:
  std::function<double(double)> f_;
};

}  // namespace
}  // namespace detail

std::string to_string(PresetKind kind) {
  switch (kind) {
    case PresetKind::Stable: return "stable";
    case PresetKind::TruncatedStable: return "truncated-stable";
    case PresetKind::SumOfStables: return "sum-of-stables";
    case PresetKind::SubordinateBM: return "subordinate-bm";
    case PresetKind::ProfileNu: return "profile-nu";
    case PresetKind::Custom: return "custom";
  }
  return "unknown";
}

PresetKind preset_from_string(const std::string& name) {
  for (auto k : {PresetKind::Stable, PresetKind::TruncatedStable, PresetKind::SumOfStables,
                 PresetKind::SubordinateBM, PresetKind::ProfileNu, PresetKind::Custom}) {
    if (to_string(k) == name) return k;
  }
  throw ModelInvalid("unknown model kind '" + name + "'");
}

std::string to_string(NuProfile profile) {
  switch (profile) {
    case NuProfile::Piecewise: return "piecewise";
    case NuProfile::LogRatio: return "log-ratio";
    case NuProfile::InverseLog: return "inverse-log";
  }
  return "unknown";
}

NuProfile nu_profile_from_string(const std::string& name) {
  for (auto p : {NuProfile::Piecewise, NuProfile::LogRatio, NuProfile::InverseLog}) {
    if (to_string(p) == name) return p;
  }
  throw ModelInvalid("unknown nu profile '" + name + "'");
}

double stable_nu_constant(int d, double alpha) {
  using boost::math::tgamma;
  return alpha * std::pow(2.0, alpha - 1.0) * tgamma(0.5 * (d + alpha)) /
         (std::pow(nm::kPi, 0.5 * d) * tgamma(1.0 - 0.5 * alpha));
}

ProcessModel::ProcessModel(std::shared_ptr<const detail::ModelImpl> impl) : impl_(std::move(impl)) {}

ProcessModel ProcessModel::stable(int d, double alpha, double scale) {
  require_dimension(d);
  require_alpha(alpha, "alpha");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw ModelInvalid("scale must be positive");
  ModelParams p{PresetKind::Stable, d, alpha, 0.0, 0.0, scale, NuProfile::Piecewise};
  std::string label = "stable(d=" + std::to_string(d) + ", alpha=" + fmt(alpha) + ", scale=" + fmt(scale) + ")";
  return ProcessModel(std::make_shared<detail::PowerLawImpl>(p, label, std::vector<detail::PowerTerm>{{alpha, scale}}));
}

ProcessModel ProcessModel::power_law_nu(int d, double alpha, double coefficient) {
  require_dimension(d);
  require_alpha(alpha, "alpha");
  return stable(d, alpha, coefficient / stable_nu_constant(d, alpha));
}

ProcessModel ProcessModel::truncated_stable(int d, double alpha, double beta) {
  require_dimension(d);
  require_alpha(alpha, "alpha");
  if (!(beta >= 0.0)) throw ModelInvalid("beta must be nonnegative");
  ModelParams p{PresetKind::TruncatedStable, d, alpha, 0.0, beta, 1.0, NuProfile::Piecewise};
  auto impl = std::make_shared<detail::TruncatedImpl>(
      p, "truncated-stable(d=" + std::to_string(d) + ", alpha=" + fmt(alpha) + ", beta=" + fmt(beta) + ")");
  impl->breaks = {1.0};
  impl->support = 1.0;
  return ProcessModel(impl);
}

ProcessModel ProcessModel::sum_of_stables(int d, double alpha1, double alpha2) {
  require_dimension(d);
  require_alpha(alpha1, "alpha");
  require_alpha(alpha2, "alpha2");
  if (alpha1 > alpha2) throw ModelInvalid("sum-of-stables requires alpha <= alpha2");
  ModelParams p{PresetKind::SumOfStables, d, alpha1, alpha2, 0.0, 1.0, NuProfile::Piecewise};
  std::string label = "sum-of-stables(d=" + std::to_string(d) + ", alpha=" + fmt(alpha1) + ", alpha2=" + fmt(alpha2) + ")";
  return ProcessModel(std::make_shared<detail::PowerLawImpl>(
      p, label, std::vector<detail::PowerTerm>{{alpha1, 1.0}, {alpha2, 1.0}}));
}

ProcessModel ProcessModel::subordinate_bm(int d, double alpha) {
  require_dimension(d);
  require_alpha(alpha, "alpha");
  ModelParams p{PresetKind::SubordinateBM, d, alpha, 0.0, 0.0, 1.0, NuProfile::Piecewise};
  return ProcessModel(std::make_shared<detail::SubordinateImpl>(
      p, "subordinate-bm(d=" + std::to_string(d) + ", alpha=" + fmt(alpha) + ")"));
}

ProcessModel ProcessModel::profile_nu(int d, NuProfile profile, double alpha1, double alpha2) {
  require_dimension(d);
  require_alpha(alpha1, "alpha");
  if (profile == NuProfile::Piecewise) require_alpha(alpha2, "alpha2");
  else alpha2 = 0.0;
  ModelParams p{PresetKind::ProfileNu, d, alpha1, alpha2, 0.0, 1.0, profile};
  std::string label = "profile-nu(d=" + std::to_string(d) + ", profile=" + to_string(profile) +
                      ", alpha=" + fmt(alpha1) + ", alpha2=" + fmt(alpha2) + ")";
  auto impl = std::make_shared<detail::ProfileImpl>(p, label);
  if (profile == NuProfile::Piecewise) impl->breaks = {1.0};
  return ProcessModel(impl);
}

ProcessModel ProcessModel::custom(int d, std::function<double(double)> nu, std::vector<double> breakpoints,
                                  double support, std::string label) {
  require_dimension(d);
  if (!nu) throw ModelInvalid("custom model needs a density");
  if (!(support > 0.0)) throw ModelInvalid("support radius must be positive");
  ModelParams p{PresetKind::Custom, d, 0.0, 0.0, 0.0, 1.0, NuProfile::Piecewise};
  auto impl = std::make_shared<detail::CustomImpl>(p, "custom(d=" + std::to_string(d) + ", " + label + ")", std::move(nu));
  impl->breaks = std::move(breakpoints);
  if (std::isfinite(support)) impl->breaks.push_back(support);
  std::sort(impl->breaks.begin(), impl->breaks.end());
  impl->support = support;

  // nonincreasing, integrable against |z|^2 ^ 1, infinite near the origin
  double prev = kInf;
  for (double s : nm::geomspace(1e-6, std::isfinite(support) ? support * 0.999 : 1e6, 241)) {
    double v = impl->nu(s);
    if (!(v >= 0.0) || !std::isfinite(v)) throw ModelInvalid("custom nu is not finite and nonnegative at s=" + fmt(s));
    if (v > prev * (1.0 + 1e-12)) throw ModelInvalid("custom nu is increasing near s=" + fmt(s));
    prev = v;
  }
  const double mass = impl->moment(1.0) + impl->tail(1.0);
  if (!std::isfinite(mass)) throw ModelInvalid("custom nu is not integrable against |z|^2 ^ 1");
  auto ring = [&](double eps) {
    auto g = [&](double s) { return mul0(impl->nu(s), ipow(s, d - 1)); };
    return nm::integrate(g, eps, std::min(1.0, support), impl->breaks, 1e-8);
  };
  // mass gained per squaring of the cutoff must not die out
  const double r3 = ring(1e-3), r6 = ring(1e-6), r12 = ring(1e-12);
  if (!(r12 - r6 > 0.5 * (r6 - r3))) throw ModelInvalid("custom nu must have infinite total mass");
  return ProcessModel(impl);
}

ProcessModel ProcessModel::from_params(const ModelParams& p) {
  switch (p.kind) {
    case PresetKind::Stable: return stable(p.dimension, p.alpha, p.scale);
    case PresetKind::TruncatedStable: return truncated_stable(p.dimension, p.alpha, p.beta);
    case PresetKind::SumOfStables: return sum_of_stables(p.dimension, p.alpha, p.alpha2);
    case PresetKind::SubordinateBM: return subordinate_bm(p.dimension, p.alpha);
    case PresetKind::ProfileNu: return profile_nu(p.dimension, p.profile, p.alpha, p.alpha2);
    case PresetKind::Custom: break;
  }
  throw ModelInvalid("custom models cannot be built from parameters alone");
}

int ProcessModel::dimension() const { return impl_->params.dimension; }
PresetKind ProcessModel::kind() const { return impl_->params.kind; }
const ModelParams& ProcessModel::params() const { return impl_->params; }
std::string ProcessModel::describe() const { return impl_->label; }
std::uint64_t ProcessModel::fingerprint() const { return fnv1a(impl_->label); }

double ProcessModel::psi(double u) const {
  if (!(u >= 0.0)) throw DomainError("psi requires u >= 0");
  return impl_->psi(u);
}

double ProcessModel::log_psi(double u) const { return impl_->log_psi(u); }
double ProcessModel::psi_fast(double u) const { return u <= 0.0 ? 0.0 : std::exp(impl_->log_psi(u)); }
bool ProcessModel::psi_closed_form() const { return impl_->log_psi_closed(1.0).has_value(); }

std::optional<std::complex<double>> ProcessModel::log_psi_complex(std::complex<double> z) const {
  return impl_->log_psi_complex(z);
}

double ProcessModel::nu(double s) const {
  if (!(s > 0.0)) throw DomainError("nu requires s > 0");
  return impl_->nu(s);
}

double ProcessModel::tail_mass(double r) const {
  if (!(r > 0.0)) throw DomainError("tail mass requires r > 0");
  return impl_->tail(r);
}

double ProcessModel::second_moment(double r) const {
  if (!(r > 0.0)) throw DomainError("second moment requires r > 0");
  return impl_->moment(r);
}

double ProcessModel::pruitt_h(double r) const {
  if (!(r > 0.0)) throw DomainError("pruitt h requires r > 0");
  const double h = impl_->moment(r) / (r * r) + impl_->tail(r);
  if (!std::isfinite(h)) throw ModelInvalid("tail integral diverges at r=" + fmt(r));
  return h;
}

double ProcessModel::support_radius() const { return impl_->support; }
const std::vector<double>& ProcessModel::breakpoints() const { return impl_->breaks; }

double psi(const ProcessModel& model, double u) { return model.psi(u); }
double nu_radial(const ProcessModel& model, double s) { return model.nu(s); }
double pruitt_h(const ProcessModel& model, double r) { return model.pruitt_h(r); }
double tail_mass(const ProcessModel& model, double r) { return model.tail_mass(r); }

ScalingCharacteristics verify_scaling(const ProcessModel& model, double theta, const ScalingGrid& grid) {
  if (theta < 0.0) throw DomainError("theta must be nonnegative");
  if (grid.decades < 6.0) throw DomainError("scaling grid must span at least 6 decades");
  const double u0 = theta > 0.0 ? theta : grid.u_min;
  const double u1 = std::min(u0 * std::pow(10.0, grid.decades), grid.u_cap);
  const double span = std::log10(u1 / u0);
  if (span < 6.0 - 1e-9) throw DomainError("scaling grid capped below 6 decades above theta");
  const auto n = static_cast<std::size_t>(std::llround(span * grid.points_per_decade)) + 1;
  const auto us = nm::geomspace(u0, u1, n);
  std::vector<double> lp(n);
  for (std::size_t i = 0; i < n; ++i) lp[i] = model.log_psi(us[i]);

  const double long_range = std::log(std::pow(10.0, std::min(3.0, span / 2.0))) - 1e-9;
  ScalingCharacteristics sc;
  sc.grid = grid;
  sc.theta_low = sc.theta_up = theta;
  sc.global_low = sc.global_up = theta == 0.0;
  double lo = kInf, hi = -kInf;
  ScalingPair worst_lo, worst_hi;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double ll = std::log(us[j] / us[i]);
      if (ll < long_range) continue;
      const double e = (lp[j] - lp[i]) / ll;
      if (e < lo) {
        lo = e;
        worst_lo = {us[i], us[j] / us[i], std::exp(lp[j] - lp[i])};
      }
      if (e > hi) {
        hi = e;
        worst_hi = {us[i], us[j] / us[i], std::exp(lp[j] - lp[i])};
      }
    }
  }
  if (!(lo > 0.0)) {
    throw ScalingViolated("no lower scaling exponent in (0,2): worst pair u=" + fmt(worst_lo.u) +
                              " lambda=" + fmt(worst_lo.lambda), worst_lo.u, worst_lo.lambda, worst_lo.ratio);
  }
  if (!(hi < 2.0)) {
    throw ScalingViolated("no upper scaling exponent in (0,2): worst pair u=" + fmt(worst_hi.u) +
                              " lambda=" + fmt(worst_hi.lambda), worst_hi.u, worst_hi.lambda, worst_hi.ratio);
  }
  // Round exact power laws to the exponent; the ratios agree to rounding.
  constexpr double kSnap = 1e-12;
  sc.alpha_low = lo;
  sc.alpha_up = hi;
  double cmin = 1.0, cmax = 1.0;
  sc.extremal_low = worst_lo;
  sc.extremal_up = worst_hi;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double ll = std::log(us[j] / us[i]);
      const double r = lp[j] - lp[i];
      const double clo = std::exp(r - lo * ll);
      const double chi = std::exp(r - hi * ll);
      if (clo < cmin) {
        cmin = clo;
        sc.extremal_low = {us[i], us[j] / us[i], std::exp(r)};
      }
      if (chi > cmax) {
        cmax = chi;
        sc.extremal_up = {us[i], us[j] / us[i], std::exp(r)};
      }
      ++sc.pairs;
    }
  }
  sc.c_low = cmin > 1.0 - kSnap ? 1.0 : cmin;
  sc.C_up = cmax < 1.0 + kSnap ? 1.0 : cmax;
  return sc;
}

}  // namespace heatlab
