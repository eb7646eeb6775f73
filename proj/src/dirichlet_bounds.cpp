#include "heatlab/dirichlet_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "heatlab/errors.hpp"

namespace heatlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kExponentMargin = 0.01;

double dist_between(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
  return std::sqrt(s);
}

}  // namespace

std::string to_string(SurvivalRegime regime) {
  switch (regime) {
    case SurvivalRegime::SmallTime: return "small-time";
    case SurvivalRegime::LargeTime: return "large-time";
    case SurvivalRegime::AllTime: return "all-time";
  }
  return "unknown";
}

ScalingStatus assess_scaling(const ProcessModel& model) {
  ScalingStatus s;
  try {
    auto g = verify_scaling(model, 0.0);
    s.alpha_low = g.alpha_low;
    s.alpha_up = g.alpha_up;
    s.global = g.alpha_low > kExponentMargin && g.alpha_up < 2.0 - kExponentMargin;
    s.local = true;
    if (s.global) return s;
  } catch (const ScalingViolated&) {
  }
  try {
    auto l = verify_scaling(model, 1.0);
    s.alpha_low = l.alpha_low;
    s.alpha_up = l.alpha_up;
    s.local = l.alpha_low > kExponentMargin && l.alpha_up < 2.0 - kExponentMargin;
  } catch (const ScalingViolated&) {
    s.local = false;
  }
  return s;
}

double survival_factor(const RenewalTable& table, double delta, double t, double s) {
  if (delta <= 0.0) return 0.0;
  if (delta == kInf) return 1.0;
  double denom = std::sqrt(t);
  if (s < kInf) denom = std::min(denom, table.V(s));
  return std::min(table.V(delta) / denom, 1.0);
}

DirichletBounds::DirichletBounds(ProcessModel model, RenewalTable table, Domain domain, ConstantProfile profile)
    : model_(std::move(model)),
      table_(std::move(table)),
      domain_(std::move(domain)),
      profile_(std::move(profile)) {
  if (domain_.dimension() != model_.dimension()) throw DomainError("domain and model dimensions differ");
  profile_.validate();
  scaling_ = assess_scaling(model_);
  if (!scaling_.local) {
    throw UnsupportedRegime("no weak lower/upper scaling could be certified for " + model_.describe(),
                            "WLSC and WUSC");
  }
  const auto kind = domain_.kind();
  scale_ = domain_.c11_scales().scale();
  if (kind != DomainKind::WholeSpace && !(scale_ > 0.0)) {
    throw UnsupportedRegime("domain " + domain_.describe() + " is not C^{1,1} at any positive scale", "C^{1,1}");
  }
  t0_ = scale_ == kInf ? kInf : std::pow(table_.V(scale_), 2);
  if (kind == DomainKind::ExteriorBall && !scaling_.global) {
    throw UnsupportedRegime("exterior estimates need global scaling", "global WLSC and WUSC");
  }
  if (kind == DomainKind::ExteriorBall && !(model_.dimension() > scaling_.alpha_up)) {
    throw UnsupportedRegime("exterior estimates need d > upper scaling exponent (transience)", "d > alpha_up");
  }
  if (domain_.bounded()) {
    if (!(model_.nu(domain_.diameter()) > 0.0)) {
      throw UnsupportedRegime("Levy density vanishes at the domain diameter", "nu(diam D) > 0");
    }
    const double r = domain_.inradius();
    const double diam = domain_.diameter();
    const double v2 = std::pow(table_.V(r), 2);
    EigenBracket e;
    e.inradius = r;
    e.diameter = diam;
    e.lambda_low = 0.125 * (r / diam) * (r / diam) / v2;
    e.lambda_high = profile_.eigen_c * std::pow(diam / r, 0.5 * model_.dimension()) / v2;
    if (e.lambda_low > e.lambda_high) e.lambda_high = e.lambda_low;
    eigen_ = e;
  }
}

double DirichletBounds::decay_rate() const {
  if (decay_override_) return *decay_override_;
  if (!eigen_) return 0.0;
  return std::sqrt(eigen_->lambda_low * eigen_->lambda_high);
}

EigenBracket DirichletBounds::eigen_bracket() const {
  if (!eigen_) throw UnsupportedRegime("eigenvalue bracket needs a bounded domain", "bounded domain");
  return *eigen_;
}

SurvivalEnvelope DirichletBounds::survival(double t, std::span<const double> x) const {
  if (!(t > 0.0)) throw DomainError("survival time must be positive");
  SurvivalEnvelope env;
  const auto kind = domain_.kind();
  env.kind = kind;
  const double delta = domain_.dist(x);
  if (delta <= 0.0) {
    env.regime = t <= t0_ ? SurvivalRegime::SmallTime : SurvivalRegime::LargeTime;
    return env;
  }
  if (kind == DomainKind::WholeSpace) {
    env.structural = env.lower = env.upper = 1.0;
    return env;
  }
  const double lo = profile_.survival_lower;
  const double hi = profile_.survival_upper;

  if (domain_.bounded()) {
    const double phi = survival_factor(table_, delta, t, scale_);
    const auto& e = *eigen_;
    if (t <= t0_) {
      env.regime = SurvivalRegime::SmallTime;
      env.structural = phi;
      env.upper = hi * phi;
    } else {
      env.regime = SurvivalRegime::LargeTime;
      env.structural = phi * std::exp(-decay_rate() * t);
      env.upper = hi * phi * std::exp(-std::min(e.lambda_low, decay_rate()) * t);
    }
    env.lower = lo * phi * std::exp(-std::max(e.lambda_high, decay_rate()) * t);
    return env;
  }

  if (!scaling_.global) {
    // only the small-time form survives without global scaling, inside the scaling window
    const double t_local = std::pow(table_.V(std::min(scale_, 1.0)), 2);
    if (t > t_local) {
      throw UnsupportedRegime("survival in " + to_string(kind) + " for t > V^2(scale) needs global scaling",
                              "global WLSC and WUSC");
    }
    env.regime = SurvivalRegime::SmallTime;
    env.structural = survival_factor(table_, delta, t, kInf);
    env.lower = lo * env.structural;
    env.upper = hi * env.structural;
    return env;
  }

  env.regime = SurvivalRegime::AllTime;
  if (kind == DomainKind::ExteriorBall) {
    const auto c = domain_.c11_scales();
    env.structural = survival_factor(table_, delta, t, c.R1);
    env.lower = lo * (c.R1 / c.R2) * (c.R1 / c.R2) * env.structural;
  } else {
    env.structural = survival_factor(table_, delta, t, kInf);
    env.lower = lo * env.structural;
  }
  env.upper = hi * env.structural;
  return env;
}

double DirichletBounds::free_density(double t, double r) const {
  try {
    return p_free(model_, t, r);
  } catch (const AccuracyWarning&) {
    return p_free_detailed(model_, t, r).value;
  }
}

KernelFactorization DirichletBounds::kernel(double t, std::span<const double> x, std::span<const double> y) const {
  if (!(t > 0.0)) throw DomainError("kernel time must be positive");
  KernelFactorization k;
  const double r = dist_between(x, y);
  if (domain_.dist(x) <= 0.0 || domain_.dist(y) <= 0.0) return k;
  const double lo = profile_.factorization_lower;
  const double hi = profile_.factorization_upper;
  if (domain_.kind() == DomainKind::WholeSpace) {
    k.structural = free_density(t, r);
    k.lower = lo * k.structural;
    k.upper = hi * k.structural;
    return k;
  }
  if (domain_.bounded()) {
    const auto sx = survival(0.5 * t, x);
    const auto sy = survival(0.5 * t, y);
    const double p = free_density(std::min(t, t0_), r);
    k.regime = t <= t0_ ? SurvivalRegime::SmallTime : SurvivalRegime::LargeTime;
    k.structural = sx.structural * sy.structural * p;
    // survival bounds already carry the exponential bracket
    const double slo = sx.lower / profile_.survival_lower * sy.lower / profile_.survival_lower;
    const double shi = sx.upper / profile_.survival_upper * sy.upper / profile_.survival_upper;
    k.lower = lo * std::min(slo * p, k.structural);
    k.upper = hi * std::max(shi * p, k.structural);
    return k;
  }
  const auto sx = survival(t, x);
  const auto sy = survival(t, y);
  k.regime = sx.regime;
  k.structural = sx.structural * sy.structural * free_density(t, r);
  double geom = 1.0;
  if (domain_.kind() == DomainKind::ExteriorBall) {
    const auto c = domain_.c11_scales();
    geom = std::pow(c.R1 / c.R2, 4 + 2 * model_.dimension());
  }
  k.lower = lo * geom * k.structural;
  k.upper = hi * k.structural;
  return k;
}

ExitTimeBounds DirichletBounds::exit_time(std::span<const double> x) const {
  if (!domain_.bounded()) {
    throw UnsupportedRegime("expected exit time may be infinite outside bounded domains", "bounded domain");
  }
  ExitTimeBounds b;
  const double delta = domain_.dist(x);
  if (delta <= 0.0) return b;
  b.upper = 2.0 * std::pow(table_.V(domain_.diameter()), 2);
  b.lower = std::min(std::pow(table_.V(std::min(delta, domain_.inradius())), 2) / profile_.exit_c1, b.upper);
  return b;
}

void DirichletBounds::write_csv(std::ostream& out, std::span<const double> times, std::span<const Point> xs,
                                std::span<const Point> ys) const {
  const int d = domain_.dimension();
  out << "t";
  for (int i = 0; i < d; ++i) out << ",x" << i;
  for (int i = 0; i < d; ++i) out << ",y" << i;
  out << ",F,lower,upper,regime\n";
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, ",%.17g", v);
    out << buf;
  };
  for (double t : times) {
    for (const auto& x : xs) {
      for (const auto& y : ys) {
        const auto k = kernel(t, x, y);
        std::snprintf(buf, sizeof buf, "%.17g", t);
        out << buf;
        for (double v : x) put(v);
        for (double v : y) put(v);
        put(k.structural);
        put(k.lower);
        put(k.upper);
        out << ',' << to_string(k.regime) << "\n";
      }
    }
  }
}

VProduct v_product(const RenewalTable& table, double t0, double r, double lambda, double t) {
  if (!(lambda >= 1.0) || !(t > t0) || !(t0 > 0.0)) throw DomainError("v_product needs lambda >= 1 and t > t0 > 0");
  const double r0 = table.Vinverse(std::sqrt(t0));
  const double a = std::min(table.V(r) / std::sqrt(t0), 1.0);
  const double b = std::min(table.V(r + lambda * r0) / std::sqrt(t), 1.0);
  VProduct v;
  v.middle = std::min(table.V(r) / std::sqrt(t), 1.0);
  v.right = a * b;
  v.left = v.right / (lambda + 2.0);
  return v;
}

}  // namespace heatlab
