#include "heatlab/renewal.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <boost/math/special_functions/fpclassify.hpp>
namespace boost::math::interpolators {
using boost::math::isnan;
}
#include <boost/math/interpolators/pchip.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "heatlab/errors.hpp"
#include "heatlab/numerics.hpp"

namespace heatlab {

namespace nm = numerics;
using boost::math::interpolators::pchip;

namespace {

constexpr double kHalfPi = 1.57079632679489661923;

std::string hex64(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17e", v);
  return buf;
}

// Log-space finite differences of log V against log r.
std::vector<double> log_slopes(const std::vector<double>& lr, const std::vector<double>& lv) {
  const std::size_t n = lr.size();
  std::vector<double> s(n);
  for (std::size_t i = 1; i + 1 < n; ++i) s[i] = (lv[i + 1] - lv[i - 1]) / (lr[i + 1] - lr[i - 1]);
  const double h0 = lr[1] - lr[0];
  const double h1 = lr[n - 1] - lr[n - 2];
  s[0] = (-3.0 * lv[0] + 4.0 * lv[1] - lv[2]) / (2.0 * h0);
  s[n - 1] = (3.0 * lv[n - 1] - 4.0 * lv[n - 2] + lv[n - 3]) / (2.0 * h1);
  return s;
}

}  // namespace

std::string to_string(RenewalBackend backend) {
  return backend == RenewalBackend::ExactLaplace ? "exact-laplace" : "h-proxy";
}

RenewalBackend renewal_backend_from_string(const std::string& name) {
  if (name == "exact-laplace") return RenewalBackend::ExactLaplace;
  if (name == "h-proxy") return RenewalBackend::HProxy;
  throw DomainError("unknown renewal backend '" + name + "'");
}

struct RenewalTable::Interp {
  std::vector<double> lr;
  std::unique_ptr<pchip<std::vector<double>>> lv;
  std::unique_ptr<pchip<std::vector<double>>> ldv;
  double lv_lo = 0.0, lv_hi = 0.0, slope_lo = 0.0, slope_hi = 0.0;
  double ldv_lo = 0.0, ldv_hi = 0.0, dslope_lo = 0.0, dslope_hi = 0.0;
};

RenewalTable::RenewalTable(RenewalBackend backend, std::uint64_t fingerprint, std::vector<double> radii,
                           std::vector<double> values, std::vector<double> derivatives, double normalization,
                           std::string rule)
    : backend_(backend),
      fingerprint_(fingerprint),
      r_(std::move(radii)),
      v_(std::move(values)),
      dv_(std::move(derivatives)),
      normalization_(normalization),
      rule_(std::move(rule)) {
  const std::size_t n = r_.size();
  if (n < 4 || v_.size() != n || dv_.size() != n) throw DomainError("renewal table needs >= 4 aligned rows");
  std::vector<double> bad;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(r_[i] > 0.0) || !(v_[i] > 0.0) || !std::isfinite(v_[i])) bad.push_back(r_[i]);
    else if (i > 0 && !(v_[i] > v_[i - 1])) bad.push_back(r_[i]);
    if (!(dv_[i] > 0.0) || !std::isfinite(dv_[i])) bad.push_back(r_[i]);
    if (i > 0 && !(r_[i] > r_[i - 1])) throw DomainError("renewal grid must be increasing");
  }
  if (!bad.empty()) {
    std::ostringstream os;
    os << "renewal table is not positive and strictly increasing at r =";
    for (std::size_t i = 0; i < std::min<std::size_t>(bad.size(), 8); ++i) os << ' ' << bad[i];
    throw InversionUnstable(os.str(), bad);
  }

  auto ip = std::make_shared<Interp>();
  std::vector<double> lr(n), lv(n), ldv(n);
  for (std::size_t i = 0; i < n; ++i) {
    lr[i] = std::log(r_[i]);
    lv[i] = std::log(v_[i]);
    ldv[i] = std::log(dv_[i]);
  }
  ip->lr = lr;
  ip->lv_lo = lv.front();
  ip->lv_hi = lv.back();
  ip->slope_lo = (lv[1] - lv[0]) / (lr[1] - lr[0]);
  ip->slope_hi = (lv[n - 1] - lv[n - 2]) / (lr[n - 1] - lr[n - 2]);
  ip->ldv_lo = ldv.front();
  ip->ldv_hi = ldv.back();
  ip->dslope_lo = (ldv[1] - ldv[0]) / (lr[1] - lr[0]);
  ip->dslope_hi = (ldv[n - 1] - ldv[n - 2]) / (lr[n - 1] - lr[n - 2]);
  auto lr2 = lr;
  ip->lv = std::make_unique<pchip<std::vector<double>>>(std::move(lr), std::move(lv));
  ip->ldv = std::make_unique<pchip<std::vector<double>>>(std::move(lr2), std::move(ldv));
  interp_ = std::move(ip);
}

double RenewalTable::log_v(double lr) const {
  const auto& ip = *interp_;
  if (lr < ip.lr.front()) return ip.lv_lo + ip.slope_lo * (lr - ip.lr.front());
  if (lr > ip.lr.back()) return ip.lv_hi + ip.slope_hi * (lr - ip.lr.back());
  return (*ip.lv)(lr);
}

double RenewalTable::log_v_slope(double lr) const {
  const auto& ip = *interp_;
  if (lr < ip.lr.front()) return ip.slope_lo;
  if (lr > ip.lr.back()) return ip.slope_hi;
  return ip.lv->prime(lr);
}

double RenewalTable::V(double r) const {
  if (r <= 0.0) return 0.0;
  if (r < r_min() * (1.0 - 1e-12) || r > r_max() * (1.0 + 1e-12)) {
    throw RangeError("renewal query r=" + sci(r) + " outside [" + sci(r_min()) + ", " + sci(r_max()) + "]");
  }
  return std::exp(log_v(std::log(r)));
}

double RenewalTable::Vprime(double r) const {
  if (!(r > 0.0) || r < r_min() * (1.0 - 1e-12) || r > r_max() * (1.0 + 1e-12)) {
    throw RangeError("renewal derivative query r=" + sci(r) + " outside the table");
  }
  const double lr = std::log(r);
  if (backend_ == RenewalBackend::HProxy) return std::exp(log_v(lr)) / r * log_v_slope(lr);
  const auto& ip = *interp_;
  double ld;
  if (lr < ip.lr.front()) ld = ip.ldv_lo + ip.dslope_lo * (lr - ip.lr.front());
  else if (lr > ip.lr.back()) ld = ip.ldv_hi + ip.dslope_hi * (lr - ip.lr.back());
  else ld = (*ip.ldv)(lr);
  return std::exp(ld);
}

double RenewalTable::Vinverse(double s) const {
  if (s < 0.0) throw DomainError("Vinverse requires s >= 0");
  if (s == 0.0) return 0.0;
  double lo = std::log(r_min());
  double hi = std::log(r_max());
  const double ls = std::log(s);
  if (ls < log_v(lo) - 1e-12 || ls > log_v(hi) + 1e-12) {
    throw RangeError("Vinverse query s=" + sci(s) + " outside the table range");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (log_v(mid) < ls) lo = mid;
    else hi = mid;
  }
  return std::exp(0.5 * (lo + hi));
}

RenewalTable RenewalTable::rescaled(double factor) const {
  if (!(factor > 0.0)) throw DomainError("rescale factor must be positive");
  auto v = v_;
  auto dv = dv_;
  for (auto& x : v) x *= factor;
  for (auto& x : dv) x *= factor;
  return RenewalTable(backend_, fingerprint_, r_, std::move(v), std::move(dv), normalization_ * factor, rule_);
}

void RenewalTable::write_csv(std::ostream& out) const {
  out << "# heatlab renewal table backend=" << to_string(backend_) << " fingerprint=" << hex64(fingerprint_)
      << " normalization=" << sci(normalization_) << " rule=" << (rule_.empty() ? "none" : rule_) << "\n";
  out << "r,V,Vprime\n";
  for (std::size_t i = 0; i < r_.size(); ++i) out << sci(r_[i]) << ',' << sci(v_[i]) << ',' << sci(dv_[i]) << "\n";
}

RenewalTable RenewalTable::read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# heatlab renewal table", 0) != 0) {
    throw DomainError("renewal CSV: missing header line");
  }
  RenewalBackend backend = RenewalBackend::HProxy;
  std::uint64_t fp = 0;
  double norm = 1.0;
  std::string rule;
  std::istringstream hs(line);
  std::string tok;
  while (hs >> tok) {
    auto eq = tok.find('=');
    if (eq == std::string::npos) continue;
    const auto key = tok.substr(0, eq);
    const auto val = tok.substr(eq + 1);
    if (key == "backend") backend = renewal_backend_from_string(val);
    else if (key == "fingerprint") fp = std::stoull(val, nullptr, 16);
    else if (key == "normalization") norm = std::stod(val);
    else if (key == "rule") rule = val == "none" ? "" : val;
  }
  if (!std::getline(in, line) || line != "r,V,Vprime") throw DomainError("renewal CSV: expected column header r,V,Vprime");
  std::vector<double> r, v, dv;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string a, b, c;
    if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',') || !std::getline(ls, c)) {
      throw DomainError("renewal CSV: malformed row '" + line + "'");
    }
    r.push_back(std::stod(a));
    v.push_back(std::stod(b));
    dv.push_back(std::stod(c));
  }
  return RenewalTable(backend, fp, std::move(r), std::move(v), std::move(dv), norm, rule);
}

double kappa(const ProcessModel& model, double xi) {
  if (!(xi > 0.0)) throw DomainError("kappa requires xi > 0");
  // z = tan(phi) turns the weight 1/(1+z^2) into d(phi)
  auto f = [&](double phi) {
    const double u = std::clamp(xi * std::tan(phi), 1e-300, 1e300);
    return model.log_psi(u);
  };
  thread_local boost::math::quadrature::tanh_sinh<double> integrator(15);
  const double integral = integrator.integrate(f, 0.0, kHalfPi, 1e-12);
  return std::exp(integral / nm::kPi);
}

std::complex<double> kappa_complex(const ProcessModel& model, std::complex<double> s) {
  if (!model.log_psi_complex(std::complex<double>(1.0, 0.0))) {
    throw UnsupportedRegime("complex kappa needs a closed-form psi", "power-law characteristic exponent");
  }
  thread_local boost::math::quadrature::tanh_sinh<double> integrator(15);
  auto part = [&](bool imag) {
    auto f = [&](double phi) {
      const double t = std::clamp(std::tan(phi), 1e-300, 1e300);
      const auto lp = *model.log_psi_complex(s * t);
      return imag ? lp.imag() : lp.real();
    };
    return integrator.integrate(f, 0.0, kHalfPi, 1e-12);
  };
  const std::complex<double> integral(part(false), part(true));
  return std::exp(integral / nm::kPi);
}

double invert_laplace_stehfest(const std::function<double(double)>& transform, double t, int n) {
  using quad = boost::multiprecision::cpp_bin_float_quad;
  if (n <= 0 || n % 2 != 0) throw DomainError("Stehfest order must be positive and even");
  if (!(t > 0.0)) throw DomainError("inversion time must be positive");
  const int half = n / 2;
  auto fact = [](int k) {
    quad f = 1;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
  };
  const quad ln2 = boost::multiprecision::log(quad(2));
  const quad a = ln2 / quad(t);
  quad sum = 0;
  for (int k = 1; k <= n; ++k) {
    quad vk = 0;
    for (int j = (k + 1) / 2; j <= std::min(k, half); ++j) {
      vk += boost::multiprecision::pow(quad(j), half) * fact(2 * j) /
            (fact(half - j) * fact(j) * fact(j - 1) * fact(k - j) * fact(2 * j - k));
    }
    if ((k + half) % 2 != 0) vk = -vk;
    const double s = static_cast<double>(a * k);
    sum += vk * quad(transform(s));
  }
  return static_cast<double>(a * sum);
}

double invert_laplace_talbot(const std::function<std::complex<double>(std::complex<double>)>& transform,
                             double t, int m) {
  if (m < 2) throw DomainError("Talbot needs at least two nodes");
  if (!(t > 0.0)) throw DomainError("inversion time must be positive");
  const double r = 2.0 * m / (5.0 * t);
  double acc = 0.5 * std::exp(r * t) * transform(std::complex<double>(r, 0.0)).real();
  for (int k = 1; k < m; ++k) {
    const double theta = k * nm::kPi / m;
    const double cot = 1.0 / std::tan(theta);
    const std::complex<double> s(r * theta * cot, r * theta);
    const double sigma = theta + (theta * cot - 1.0) * cot;
    acc += (std::exp(t * s) * transform(s) * std::complex<double>(1.0, sigma)).real();
  }
  return r / m * acc;
}

namespace {

std::vector<double> grid_radii(const RenewalGrid& grid) {
  if (!(grid.log10_max > grid.log10_min) || grid.points_per_decade < 1) throw DomainError("invalid renewal grid");
  const auto n = static_cast<std::size_t>(std::llround((grid.log10_max - grid.log10_min) * grid.points_per_decade)) + 1;
  return nm::geomspace(std::pow(10.0, grid.log10_min), std::pow(10.0, grid.log10_max), n);
}

std::vector<double> non_monotone(const std::vector<double>& r, const std::vector<double>& v) {
  std::vector<double> bad;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] > 0.0) || !std::isfinite(v[i]) || (i > 0 && !(v[i] > v[i - 1]))) bad.push_back(r[i]);
  }
  return bad;
}

std::vector<double> derivative_from_logs(const std::vector<double>& r, const std::vector<double>& v) {
  std::vector<double> lr(r.size()), lv(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    lr[i] = std::log(r[i]);
    lv[i] = std::log(v[i]);
  }
  auto s = log_slopes(lr, lv);
  std::vector<double> dv(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) dv[i] = v[i] / r[i] * s[i];
  return dv;
}

void check_subadditive(const RenewalTable& table) {
  const auto& r = table.radii();
  std::vector<double> bad;
  for (std::size_t i = 0; i < r.size(); ++i) {
    for (std::size_t j = i; j < r.size(); ++j) {
      const double s = r[i] + r[j];
      if (s > r.back()) break;
      if (table.V(s) > (table.values()[i] + table.values()[j]) * (1.0 + 1e-6)) bad.push_back(s);
    }
  }
  if (!bad.empty()) throw InversionUnstable("renewal table violates subadditivity", bad);
}

}  // namespace

RenewalTable build_renewal_table(const ProcessModel& model, RenewalBackend backend, const RenewalGrid& grid,
                                 const InversionOptions& options) {
  const auto r = grid_radii(grid);
  std::vector<double> v(r.size());

  if (backend == RenewalBackend::HProxy) {
    for (std::size_t i = 0; i < r.size(); ++i) v[i] = 1.0 / std::sqrt(model.pruitt_h(r[i]));
    auto bad = non_monotone(r, v);
    if (!bad.empty()) throw InversionUnstable("h-proxy renewal table is not increasing", bad);
    // provisional table for interpolant derivatives
    RenewalTable provisional(backend, model.fingerprint(), r, v, std::vector<double>(r.size(), 1.0), 1.0, "h-proxy");
    std::vector<double> dv(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) dv[i] = provisional.Vprime(r[i]);
    RenewalTable table(backend, model.fingerprint(), r, std::move(v), std::move(dv), 1.0, "h-proxy");
    check_subadditive(table);
    return table;
  }

  std::string rule = "gaver-stehfest-" + std::to_string(options.stehfest_order);
  std::vector<double> bad;
  if (!options.force_contour) {
    auto transform = [&](double xi) { return 1.0 / (xi * kappa(model, xi)); };
    for (std::size_t i = 0; i < r.size(); ++i) v[i] = invert_laplace_stehfest(transform, r[i], options.stehfest_order);
    bad = non_monotone(r, v);
  }
  if (options.force_contour || !bad.empty()) {
    const bool contour_ok = model.log_psi_complex(std::complex<double>(1.0, 0.0)).has_value() &&
                            (model.kind() != PresetKind::SumOfStables ||
                             model.params().alpha2 - model.params().alpha <= 1.0);
    if (!contour_ok || !(options.contour_fallback || options.force_contour)) {
      std::ostringstream os;
      os << "Laplace inversion oscillates at " << bad.size() << " radii (first r=" << (bad.empty() ? 0.0 : bad.front())
         << "); use the h-proxy backend";
      throw InversionUnstable(os.str(), bad);
    }
    auto transform = [&](std::complex<double> s) { return 1.0 / (s * kappa_complex(model, s)); };
    for (std::size_t i = 0; i < r.size(); ++i) v[i] = invert_laplace_talbot(transform, r[i], options.talbot_nodes);
    rule = "talbot-" + std::to_string(options.talbot_nodes);
    bad = non_monotone(r, v);
    if (!bad.empty()) throw InversionUnstable("contour inversion is not monotone; use the h-proxy backend", bad);
  }
  auto dv = derivative_from_logs(r, v);
  RenewalTable table(backend, model.fingerprint(), r, std::move(v), std::move(dv), 1.0, rule);
  check_subadditive(table);
  return table;
}

double renewal_eval(const RenewalTable& table, RenewalQuery query, double x) {
  switch (query) {
    case RenewalQuery::V: return table.V(x);
    case RenewalQuery::Vprime: return table.Vprime(x);
    case RenewalQuery::Vinverse: return table.Vinverse(x);
  }
  return 0.0;
}

HEstimate estimate_H(const RenewalTable& table, double r, std::size_t points) {
  if (!(r > 0.0)) throw DomainError("estimate_H requires r > 0");
  if (5.0 * r > table.r_max()) throw RangeError("renewal table does not cover (0, 5r]");
  const double x_lo = std::min(table.radii().front(), r);
  const auto xs = nm::geomspace(x_lo, r, points);
  HEstimate best;
  best.points = points;
  best.x = best.y = best.z = x_lo;
  std::vector<double> vy(points), dvy(points);
  for (double x : xs) {
    const double dx = table.Vprime(x);
    if (!(dx > 0.0)) throw ConditionHUndecidable("V'(x) vanishes at x=" + std::to_string(x));
    const auto ys = nm::geomspace(x, 5.0 * x, points);
    for (std::size_t i = 0; i < points; ++i) {
      vy[i] = table.V(ys[i]);
      dvy[i] = table.Vprime(ys[i]);
    }
    for (std::size_t i = 0; i < points; ++i) {
      double q = dvy[i] / dx;
      if (q > best.H) best = {q, x, ys[i], ys[i], points};
      for (std::size_t j = i + 1; j < points; ++j) {
        q = (vy[j] - vy[i]) / (dx * (ys[j] - ys[i]));
        if (q > best.H) best = {q, x, ys[i], ys[j], points};
      }
    }
  }
  return best;
}

double Band::K() const { return std::max(upper, 1.0 / lower); }

Band compare_tables(const RenewalTable& a, const RenewalTable& b) {
  Band band{std::numeric_limits<double>::infinity(), 0.0};
  for (std::size_t i = 0; i < a.radii().size(); ++i) {
    const double r = a.radii()[i];
    if (r < b.radii().front() || r > b.radii().back()) continue;
    const double q = a.values()[i] / b.V(r);
    band.lower = std::min(band.lower, q);
    band.upper = std::max(band.upper, q);
  }
  if (band.upper == 0.0) throw RangeError("renewal tables do not overlap");
  return band;
}

Band h_v2_band(const ProcessModel& model, const RenewalTable& table) {
  Band band{std::numeric_limits<double>::infinity(), 0.0};
  for (std::size_t i = 0; i < table.radii().size(); ++i) {
    const double v = table.values()[i];
    const double q = model.pruitt_h(table.radii()[i]) * v * v;
    band.lower = std::min(band.lower, q);
    band.upper = std::max(band.upper, q);
  }
  return band;
}

double scaling_transfer_constant(const RenewalTable& table, double alpha_low) {
  const auto& r = table.radii();
  const auto& v = table.values();
  double A = 0.0;
  for (std::size_t j = 0; j < r.size(); ++j) {
    for (std::size_t i = 0; i <= j; ++i) {
      const double eta = r[i] / r[j];
      A = std::max(A, v[i] / (std::pow(eta, 0.5 * alpha_low) * v[j]));
    }
  }
  return A;
}

}  // namespace heatlab
