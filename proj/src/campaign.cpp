#include "heatlab/campaign.hpp"

#include <algorithm>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "heatlab/dirichlet_bounds.hpp"
#include "heatlab/errors.hpp"
#include "heatlab/free_kernel.hpp"
#include "heatlab/numerics.hpp"
#include "heatlab/simulator.hpp"

namespace heatlab {

namespace nm = numerics;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kZ = 1.959963984540054;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_num(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) throw Error("not a number in CSV: '" + s + "'");
  return v;
}

bool same(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

double max_of(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }
double min_of(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::min_element(v.begin(), v.end()); }

double spread(double lo, double hi) { return lo > 0.0 ? hi / lo : kInf; }

// ---------------------------------------------------------------------------

class Context {
 public:
  Context(const CampaignConfig& cfg)
      : cfg_(cfg), model_(build_model(cfg)), profile_(resolve_profile(cfg, model_)) {
    if (cfg.domain) domain_ = cfg.domain->build(model_.dimension());
  }

  const CampaignConfig& cfg() const { return cfg_; }
  const ProcessModel& model() const { return model_; }
  const ConstantProfile& profile() const { return profile_; }
  std::string hash() const { return hex64(cfg_.hash); }

  const RenewalTable& table() const {
    if (!table_) table_ = build_table(cfg_, model_);
    return *table_;
  }

  const Domain& domain(const std::string& check) const {
    if (!domain_) throw UnsupportedRegime(check + " needs a domain section", "domain");
    return *domain_;
  }
  bool has_domain() const { return domain_.has_value(); }

  const DirichletBounds& bounds(const std::string& check) const {
    if (!bounds_) bounds_.emplace(model_, table(), domain(check), profile_);
    return *bounds_;
  }

  SimConfig sim(const CheckSpec& spec) const {
    SimConfig s = cfg_.simulation;
    s.n_paths = static_cast<std::uint64_t>(spec.scalar("paths", static_cast<double>(s.n_paths)));
    if (s.n_paths < 1) throw ConfigError("paths must be positive", "checks." + spec.name + ".paths", spec.line);
    return s;
  }

  const ScalingStatus& scaling() const {
    if (!scaling_) scaling_ = assess_scaling(model_);
    return *scaling_;
  }

 private:
  const CampaignConfig& cfg_;
  ProcessModel model_;
  ConstantProfile profile_;
  std::optional<Domain> domain_;
  mutable std::optional<RenewalTable> table_;
  mutable std::optional<DirichletBounds> bounds_;
  mutable std::optional<ScalingStatus> scaling_;
};

// (t, r) grid on which the free-kernel envelope is claimed.
struct Window {
  double theta = 0.0;
  double t_lo = 0.0, t_hi = 0.0, r_lo = 0.0, r_hi = 0.0;
  std::string label;
};

Window envelope_window(const Context& ctx) {
  Window w;
  const auto& sc = ctx.scaling();
  w.theta = ctx.cfg().theta > 0.0 ? ctx.cfg().theta : (sc.global ? 0.0 : 1.0);
  if (w.theta == 0.0) {
    w.t_lo = 1e-2;
    w.t_hi = 1e2;
    w.r_lo = 1e-2;
    w.r_hi = 1e2;
    w.label = "global";
    return w;
  }
  const double rho = 1.0 / w.theta;
  const double v = std::pow(ctx.table().V(rho), 2);
  w.t_lo = 1e-3 * v;
  w.t_hi = 0.5 * v;
  w.r_lo = 1e-2 * rho;
  w.r_hi = 0.5 * rho;
  w.label = "local window r < " + short_num(rho);
  return w;
}

struct Output {
  std::vector<ReportRow>& rows;
  std::vector<DataTable>& tables;
  const Context& ctx;
  const CheckSpec& spec;

  void row(const std::string& case_name, const std::string& grid, double lo, double hi, double stat,
           double ceiling, const std::string& detail) {
    ReportRow r;
    r.check = spec.name;
    r.case_name = case_name;
    r.grid = grid;
    r.min_ratio = lo;
    r.max_ratio = hi;
    r.statistic = stat;
    r.ceiling = ceiling;
    r.status = std::isfinite(stat) && stat <= ceiling ? CheckStatus::Pass : CheckStatus::Fail;
    r.detail = detail;
    r.config_hash = ctx.hash();
    rows.push_back(std::move(r));
  }

  void skip(const std::string& case_name, const std::string& grid, const std::string& detail) {
    ReportRow r;
    r.check = spec.name;
    r.case_name = case_name;
    r.grid = grid;
    r.status = CheckStatus::Skipped;
    r.detail = detail;
    r.config_hash = ctx.hash();
    rows.push_back(std::move(r));
  }

  DataTable& table(std::vector<std::string> columns, std::vector<std::string> units, std::vector<std::string> plot,
                   std::string block = {}) {
    DataTable t;
    t.check = spec.name;
    t.columns = std::move(columns);
    t.units = std::move(units);
    t.plot = std::move(plot);
    t.block = std::move(block);
    tables.push_back(std::move(t));
    return tables.back();
  }

  double ceiling(double fallback) const { return spec.ceiling.value_or(fallback); }
};

// Point at distance delta from the boundary, on a fixed normal line.
Point point_at_distance(const Domain& D, double delta) {
  const int d = D.dimension();
  Point x(d, 0.0);
  switch (D.kind()) {
    case DomainKind::Interval: x[0] = D.lo() + delta; break;
    case DomainKind::Ball:
      x = D.center();
      x[0] += D.radius() - delta;
      break;
    case DomainKind::ExteriorBall:
      x = D.center();
      x[0] += D.radius() + delta;
      break;
    case DomainKind::Halfspace: x[d - 1] = D.level() + delta; break;
    case DomainKind::HalfspaceLikeSlabBump: x[d - 1] = D.level() + delta; break;
    case DomainKind::UnionTwoBalls: {
      const auto& c1 = D.center();
      const auto& c2 = D.center2();
      double n = 0.0;
      for (int k = 0; k < d; ++k) n += (c1[k] - c2[k]) * (c1[k] - c2[k]);
      n = std::sqrt(n);
      for (int k = 0; k < d; ++k) x[k] = c1[k] + (D.radius() - delta) * (c1[k] - c2[k]) / n;
      break;
    }
    case DomainKind::WholeSpace: x[0] = delta; break;
  }
  return x;
}

// Tangential unit vector at the sampling line (zero in d = 1).
Point tangent(const Domain& D) {
  Point t(D.dimension(), 0.0);
  if (D.dimension() == 1) return t;
  if (D.kind() == DomainKind::Halfspace || D.kind() == DomainKind::HalfspaceLikeSlabBump) t[0] = 1.0;
  else t[1] = 1.0;
  return t;
}

Point interior_reference(const Domain& D) {
  switch (D.kind()) {
    case DomainKind::Interval: return {0.5 * (D.lo() + D.hi())};
    case DomainKind::Ball:
    case DomainKind::UnionTwoBalls: return D.center();
    default: return point_at_distance(D, 1.0);
  }
}

double reference_scale(const Domain& D) {
  if (D.bounded()) return D.inradius();
  const double s = D.c11_scales().scale();
  return std::isfinite(s) ? s : 1.0;
}

std::string list_text(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : " ") + short_num(x);
  return "[" + s + "]";
}

double survivors(const EmpiricalStats& s) { return s.estimate * static_cast<double>(s.n_paths); }

// ---------------------------------------------------------------------------

double cauchy_density(int d, double t, double r) {
  const double s = t * t + r * r;
  switch (d) {
    case 1: return t / (nm::kPi * s);
    case 2: return t / (2.0 * nm::kPi * std::pow(s, 1.5));
    default: return t / (nm::kPi * nm::kPi * s * s);
  }
}

void check_free_kernel_oracle(Output& out) {
  const auto& m = out.ctx.model();
  const auto& p = m.params();
  if (p.kind != PresetKind::Stable || p.alpha != 1.0) {
    throw UnsupportedRegime("closed-form free kernel is only available for the Cauchy preset", "stable alpha = 1");
  }
  const double t = out.spec.scalar("t", 1.0);
  const auto radii = nm::linspace(0.0, out.spec.scalar("r_max", 10.0), static_cast<std::size_t>(out.spec.scalar("points", 21)));
  auto& tab = out.table({"r", "p_free", "oracle", "ratio"}, {"length", "1/length^d", "1/length^d", "1"},
                        {"r", "p_free", "oracle"});
  std::vector<double> ratios;
  for (double r : radii) {
    const double v = p_free_detailed(m, t, r).value;
    const double o = cauchy_density(m.dimension(), p.scale * t, r);
    ratios.push_back(v / o);
    tab.rows.push_back({r, v, o, v / o});
  }
  const double lo = min_of(ratios), hi = max_of(ratios);
  out.row("t=" + short_num(t), "r in " + list_text({radii.front(), radii.back()}) + " x" + std::to_string(radii.size()),
          lo, hi, std::max({spread(lo, hi), hi, 1.0 / lo}), out.ceiling(1.0001),
          "max relative error " + short_num(std::max(hi - 1.0, 1.0 - lo)));
}

void check_renewal_exactness(Output& out) {
  const auto& m = out.ctx.model();
  const auto& p = m.params();
  const double r_min = out.spec.scalar("r_min", 1e-2), r_max = out.spec.scalar("r_max", 1e2);
  const auto n = static_cast<std::size_t>(out.spec.scalar("points", 41));
  const auto radii = nm::geomspace(r_min, r_max, n);
  const std::string grid = "r in " + list_text({r_min, r_max}) + " x" + std::to_string(n);
  auto spec_grid = out.ctx.cfg().renewal.grid;
  const auto exact = build_renewal_table(m, RenewalBackend::ExactLaplace, spec_grid, out.ctx.cfg().renewal.inversion);
  auto& tab = out.table({"r", "V_exact", "V_closed", "V_proxy"}, {"length", "sqrt(time)", "sqrt(time)", "sqrt(time)"},
                        {"r", "V_exact", "V_closed", "V_proxy"});
  const auto proxy = build_renewal_table(m, RenewalBackend::HProxy, spec_grid);
  const bool closed = p.kind == PresetKind::Stable;
  std::vector<double> ratios;
  for (double r : radii) {
    const double ve = exact.V(r);
    const double vc = closed ? std::pow(r, 0.5 * p.alpha) / (std::sqrt(p.scale) * boost::math::tgamma(1.0 + 0.5 * p.alpha))
                             : std::nan("");
    if (closed) ratios.push_back(ve / vc);
    tab.rows.push_back({r, ve, vc, proxy.V(r)});
  }
  if (closed) {
    const double lo = min_of(ratios), hi = max_of(ratios);
    out.row("exact-laplace", grid, lo, hi, std::max({spread(lo, hi), hi, 1.0 / lo}), out.ceiling(1.001),
            "rule=" + exact.rule() + " max relative error " + short_num(std::max(hi - 1.0, 1.0 - lo)));
  } else {
    out.skip("exact-laplace", grid, "no closed form for " + m.describe());
  }
  const auto band = compare_tables(proxy, exact);
  out.row("proxy-band", "table grid", band.lower, band.upper, band.K(), out.spec.scalar("proxy_ceiling", 10.0),
          "K = " + short_num(band.K()) + " (V_proxy / V_exact)");
}

struct EnvelopeBand {
  double lo = kInf;
  double hi = 0.0;
  double K() const { return std::max(hi, 1.0 / lo); }
};

// Radius where the near and far branches meet; 0 when outside [r_lo, r_hi].
double crossover_radius(const Context& ctx, double t, double theta, double r_lo, double r_hi) {
  auto gap = [&](double r) {
    const auto env = p_free_envelope(ctx.model(), ctx.table(), t, r, {}, theta);
    return std::log(env.far_branch / env.near_branch);
  };
  if (!(gap(r_lo) > 0.0) || !(gap(r_hi) < 0.0)) return 0.0;
  double a = std::log(r_lo), b = std::log(r_hi);
  for (int i = 0; i < 60; ++i) {
    const double m = 0.5 * (a + b);
    (gap(std::exp(m)) > 0.0 ? a : b) = m;
  }
  return std::exp(0.5 * (a + b));
}

EnvelopeBand envelope_band(const Context& ctx, const std::vector<double>& times, const std::vector<double>& radii,
                           double theta, DataTable* tab) {
  EnvelopeBand b;
  for (double t : times) {
    std::vector<double> rs(radii.begin(), radii.end());
    const double r_cross = crossover_radius(ctx, t, theta, radii.front(), radii.back());
    if (r_cross > 0.0) {
      rs.insert(std::upper_bound(rs.begin(), rs.end(), r_cross), r_cross);
    }
    for (double r : rs) {
      double v = 0.0;
      try {
        v = p_free(ctx.model(), t, r);
      } catch (const AccuracyWarning&) {
        v = p_free_detailed(ctx.model(), t, r).value;
      }
      const auto env = p_free_envelope(ctx.model(), ctx.table(), t, r, {}, theta);
      const double base = std::min(env.near_branch, env.far_branch);
      const double ratio = v / base;
      b.lo = std::min(b.lo, ratio);
      b.hi = std::max(b.hi, ratio);
      if (tab) {
        const auto c = ctx.profile().kernel();
        tab->rows.push_back({t, r, v, c.lower * base, c.upper * base, ratio, env.regime == KernelRegime::Near ? 0.0 : 1.0});
      }
    }
  }
  return b;
}

void check_free_kernel_envelope(Output& out) {
  const auto& ctx = out.ctx;
  const auto& table = ctx.table();
  const auto& sc = ctx.scaling();
  if (!sc.local) throw UnsupportedRegime("no scaling certified for " + ctx.model().describe(), "WLSC and WUSC");
  const auto win = envelope_window(ctx);
  const double theta = win.theta;
  const double t_min = out.spec.scalar("t_min", win.t_lo);
  const double t_max = out.spec.scalar("t_max", win.t_hi);
  const double r_min = out.spec.scalar("r_min", win.r_lo);
  const double r_max = out.spec.scalar("r_max", win.r_hi);
  const auto nt = static_cast<std::size_t>(out.spec.scalar("times", 16));
  const auto nr = static_cast<std::size_t>(out.spec.scalar("radii", 16));
  const auto refine = static_cast<std::size_t>(out.spec.scalar("refine", 2));
  const std::string window = win.label;
  auto& tab = out.table({"t", "r", "p_free", "env_lower", "env_upper", "ratio", "far"},
                        {"time", "length", "1/length^d", "1/length^d", "1/length^d", "1", "flag"},
                        {"r", "p_free", "env_lower", "env_upper"}, "t");
  const auto coarse = envelope_band(ctx, nm::geomspace(t_min, t_max, nt), nm::geomspace(r_min, r_max, nr), theta, &tab);
  const auto fine = envelope_band(ctx, nm::geomspace(t_min, t_max, refine * (nt - 1) + 1),
                                  nm::geomspace(r_min, r_max, refine * (nr - 1) + 1), theta, nullptr);
  const std::string grid = "t in " + list_text({t_min, t_max}) + ", r in " + list_text({r_min, r_max});
  out.row("grid " + std::to_string(nt) + "x" + std::to_string(nr), grid, coarse.lo, coarse.hi,
          spread(coarse.lo, coarse.hi), out.ceiling(1e3), "K = " + short_num(coarse.K()) + ", " + window);
  out.row("refined x" + std::to_string(refine), grid, fine.lo, fine.hi, spread(fine.lo, fine.hi), out.ceiling(1e3),
          "K = " + short_num(fine.K()));
  const double change = std::abs(fine.K() / coarse.K() - 1.0);
  out.row("refinement-stability", grid, coarse.K(), fine.K(), change, 0.1, "relative change of K under refinement");
  const double R = out.spec.scalar("gr_radius", 10.0);
  const auto gr = check_GR(ctx.model(), table, R);
  // G_R is asserted when nu does not vanish before R
  const bool expected = ctx.model().support_radius() >= R;
  if (expected && !sc.global) {
    out.skip("G_R R=" + short_num(R), "check_GR default grid",
             std::string(gr.holds ? "holds" : "fails") +
                 " on the grid; not asserted beyond the scaling window when nu has unbounded support");
  } else {
    out.row("G_R R=" + short_num(R), "check_GR default grid", gr.constant, gr.constant,
            gr.holds == expected ? 0.0 : 1.0, 0.0,
            std::string(gr.holds ? "holds" : "fails") + " (expected " + (expected ? "holds" : "fails") + "), t=" +
                short_num(gr.t) + " r=" + short_num(gr.r));
  }
  if (theta > 0.0) {
    const auto inside = check_GR(ctx.model(), table, 1.0 / theta);
    out.row("G_R R=" + short_num(1.0 / theta), "check_GR default grid", inside.constant, inside.constant, inside.holds ? 0.0 : 1.0, 0.0,
            std::string(inside.holds ? "holds" : "fails") + " inside the local window");
  }
}

void check_envelope_sandwich(Output& out) {
  const auto& ctx = out.ctx;
  const auto& sc = ctx.scaling();
  if (!sc.local) throw UnsupportedRegime("no scaling certified for " + ctx.model().describe(), "WLSC and WUSC");
  const auto win = envelope_window(ctx);
  const double theta = win.theta;
  const auto times = nm::geomspace(win.t_lo, win.t_hi, static_cast<std::size_t>(out.spec.scalar("times", 8)));
  const auto radii = nm::geomspace(win.r_lo, win.r_hi, static_cast<std::size_t>(out.spec.scalar("radii", 8)));
  const auto c = ctx.profile().kernel();
  auto& tab = out.table({"t", "r", "p_free", "env_lower", "env_upper"},
                        {"time", "length", "1/length^d", "1/length^d", "1/length^d"},
                        {"r", "p_free", "env_lower", "env_upper"}, "t");
  double worst = 0.0, lo = kInf, hi = 0.0;
  for (double t : times) {
    for (double r : radii) {
      const auto env = p_free_envelope(ctx.model(), ctx.table(), t, r, c, theta);
      double v = 0.0;
      try {
        v = p_free(ctx.model(), t, r);
      } catch (const AccuracyWarning&) {
        v = p_free_detailed(ctx.model(), t, r).value;
      }
      tab.rows.push_back({t, r, v, env.lower, env.upper});
      lo = std::min(lo, v / env.lower);
      hi = std::max(hi, v / env.upper);
      worst = std::max({worst, env.lower / v, v / env.upper});
    }
  }
  out.row("free-kernel profile=" + c.profile, "t x r " + std::to_string(times.size()) + "x" + std::to_string(radii.size()),
          lo, hi, worst, out.ceiling(1.0),
          "statistic = max(lower/p, p/upper); profile constants " + short_num(c.lower) + ", " + short_num(c.upper));
  if (!ctx.has_domain()) return;
  const auto& b = ctx.bounds(out.spec.name);
  const auto& D = b.domain();
  const double s = reference_scale(D);
  const auto dists = out.spec.list("distances", nm::geomspace(0.05 * s, s, 5));
  const auto btimes = nm::geomspace(0.05 * std::pow(ctx.table().V(s), 2), 20.0 * std::pow(ctx.table().V(s), 2), 6);
  double violations = 0.0, flo = kInf, fhi = 0.0;
  const Point tan = tangent(D);
  for (double dx : dists) {
    for (double dy : dists) {
      auto x = point_at_distance(D, dx);
      auto y = point_at_distance(D, dy);
      for (std::size_t k = 0; k < y.size(); ++k) y[k] += 0.5 * s * tan[k];
      for (double t : btimes) {
        const auto f = b.kernel(t, x, y);
        const auto sx = b.survival(t, x);
        if (!(f.lower <= f.structural && f.structural <= f.upper)) violations += 1.0;
        if (!(sx.lower <= sx.structural && sx.structural <= sx.upper)) violations += 1.0;
        if (f.structural > 0.0) {
          flo = std::min(flo, f.lower / f.structural);
          fhi = std::max(fhi, f.upper / f.structural);
        }
      }
    }
  }
  out.row("dirichlet " + to_string(D.kind()), "distances " + list_text(dists) + " x " + std::to_string(btimes.size()) + " times",
          flo, fhi, violations, 0.0, "count of lower <= structural <= upper violations");
}

void check_survival_factorization(Output& out) {
  const auto& ctx = out.ctx;
  const auto& b = ctx.bounds(out.spec.name);
  const auto& D = b.domain();
  const double s = reference_scale(D);
  const double t_ref = std::pow(ctx.table().V(s), 2);
  const auto dists = out.spec.list("distances", nm::geomspace(0.02 * s, 0.9 * s, 8));
  const auto times = out.spec.list("times", nm::geomspace(0.01 * t_ref, t_ref, 6));
  auto sim_cfg = ctx.sim(out.spec);
  const std::uint64_t n = sim_cfg.n_paths;
  sim_cfg.n_paths = 2 * n;
  Simulator sim(ctx.model(), sim_cfg);
  auto& tab = out.table({"t", "x", "empirical", "ci_low", "ci_high", "structural", "lower", "upper", "ratio", "n_paths"},
                        {"time", "length", "1", "1", "1", "1", "1", "1", "1", "count"},
                        {"t", "x", "empirical", "lower", "upper"}, "x");
  struct Band {
    double lo = kInf, hi = 0.0;          // point ratios
    double lo_ci = kInf, hi_ci = 0.0;    // widened by the CI
    double lo_in = kInf, hi_in = 0.0;    // narrowed by the CI
  } half, full;
  auto update = [](Band& band, const EmpiricalStats& st, double f) {
    band.lo = std::min(band.lo, st.estimate / f);
    band.hi = std::max(band.hi, st.estimate / f);
    band.lo_ci = std::min(band.lo_ci, st.lower / f);
    band.hi_ci = std::max(band.hi_ci, st.upper / f);
    band.lo_in = std::min(band.lo_in, st.upper / f);
    band.hi_in = std::max(band.hi_in, st.lower / f);
  };
  for (double delta : dists) {
    const auto x = point_at_distance(D, delta);
    const double dx = D.dist(x);
    if (!(dx > 0.0)) throw ConfigError("distance " + short_num(delta) + " leaves the domain",
                                       "checks." + out.spec.name + ".distances", out.spec.line);
    const auto paths = sim.run(D, x, times.back(), {});
    for (double t : times) {
      std::uint64_t alive_half = 0, alive = 0;
      for (std::uint64_t i = 0; i < paths.size(); ++i) {
        const bool a = !paths[i].exit.exited || paths[i].exit.tau > t;
        alive += a;
        if (i < n) alive_half += a;
      }
      const auto f = b.survival(t, x);
      const auto sh = wilson_stats(alive_half, n);
      const auto sf = wilson_stats(alive, 2 * n);
      update(half, sh, f.structural);
      update(full, sf, f.structural);
      tab.rows.push_back({t, dx, sf.estimate, sf.lower, sf.upper, f.structural, f.lower, f.upper,
                          sf.estimate / f.structural, static_cast<double>(2 * n)});
    }
  }
  const std::string grid = std::to_string(dists.size()) + " distances " + list_text(dists) + " x " +
                           std::to_string(times.size()) + " times " + list_text({times.front(), times.back()});
  const double ceiling = out.ceiling(10.0);
  auto K = [](const Band& bd) { return std::max(bd.hi, 1.0 / bd.lo); };
  out.row("n_paths=" + std::to_string(n), grid, half.lo, half.hi, spread(half.lo, half.hi), ceiling,
          "K = " + short_num(K(half)) + " (empirical / structural factor)");
  out.row("n_paths=" + std::to_string(2 * n), grid, full.lo, full.hi, spread(full.lo, full.hi), ceiling,
          "K = " + short_num(K(full)));
  // the doubled run may not widen the band beyond both confidence allowances
  const double narrowed = spread(full.lo_in, full.hi_in);
  const double widened = spread(half.lo_ci, half.hi_ci);
  out.row("doubling", grid, narrowed, widened, narrowed / widened, 1.0,
          "CI-narrowed spread at 2n over CI-widened spread at n");
}

void check_kernel_factorization(Output& out) {
  const auto& ctx = out.ctx;
  const auto& b = ctx.bounds(out.spec.name);
  const auto& D = b.domain();
  const double s = reference_scale(D);
  const double t_ref = std::pow(ctx.table().V(s), 2);
  const auto times = out.spec.list("times", {0.25 * t_ref, 0.5 * t_ref, t_ref, 2.0 * t_ref});
  const auto xd = out.spec.list("x_distances", {0.5 * s, s, 2.0 * s});
  const auto yd = out.spec.list("y_distances", {0.5 * s, s, 2.0 * s});
  const double sep = out.spec.scalar("separation", D.dimension() == 1 ? 0.0 : s);
  const double w = out.spec.scalar("bin_width", 0.1 * s);
  auto& tab = out.table({"t", "x", "y", "empirical", "ci_low", "ci_high", "F", "lower", "upper"},
                        {"time", "length", "length", "1/length^d", "1/length^d", "1/length^d", "1/length^d",
                         "1/length^d", "1/length^d"},
                        {"y", "empirical", "F", "lower", "upper"}, "t");
  const auto sim_cfg = ctx.sim(out.spec);
  Simulator sim(ctx.model(), sim_cfg);
  std::vector<double> sorted = times;
  std::sort(sorted.begin(), sorted.end());
  const Point tan = tangent(D);
  const int d = D.dimension();
  double lo = kInf, hi = 0.0, lo3 = kInf, hi3 = 0.0;
  for (double dx : xd) {
    const auto x = point_at_distance(D, dx);
    const auto paths = sim.run(D, x, sorted.back(), sorted);
    for (double dy : yd) {
      auto y = point_at_distance(D, dy);
      for (int k = 0; k < d; ++k) y[k] += sep * tan[k];
      BinSpec bins{BinSpec::Kind::Radial, y, {0.0, w}};
      for (std::size_t k = 0; k < sorted.size(); ++k) {
        const double t = sorted[k];
        const auto h = histogram_from_paths(paths, k, t, bins, d, sim_cfg.seed);
        const auto& e = h.density[0];
        // bin average of F along the normal line
        double F = 0.0;
        const int m = 5;
        for (int j = 0; j < m; ++j) {
          auto yj = y;
          const double off = w * (2.0 * (j + 0.5) / m - 1.0);
          if (d == 1) yj[0] += off;
          else yj[d - 1] += off * (D.kind() == DomainKind::Halfspace ? 1.0 : 0.0);
          F += b.kernel(t, x, yj).structural / m;
        }
        const auto fb = b.kernel(t, x, y);
        tab.rows.push_back({t, dx, dy, e.estimate, e.lower, e.upper, F, fb.lower, fb.upper});
        if (!(F > 0.0)) continue;
        const double r = e.estimate / F;
        const double three = 3.0 * e.half_width / kZ;
        lo = std::min(lo, r);
        hi = std::max(hi, r);
        lo3 = std::min(lo3, (e.estimate + three) / F);
        hi3 = std::max(hi3, std::max(0.0, e.estimate - three) / F);
      }
    }
  }
  const std::string grid = std::to_string(times.size()) + " times x " + std::to_string(xd.size()) + "x" +
                           std::to_string(yd.size()) + " pairs, bin radius " + short_num(w);
  out.row("3sigma", grid, lo3, hi3, spread(lo3, hi3), out.ceiling(100.0),
          "K = " + short_num(std::max(hi, 1.0 / lo)) + " from point ratios in [" + short_num(lo) + ", " +
              short_num(hi) + "]");
}

struct DecayFit {
  double rate = 0.0;
  double half_width = kInf;
  std::size_t used = 0;
};

DecayFit fit_decay(const std::vector<double>& t, const std::vector<EmpiricalStats>& s, double min_survivors,
                   std::vector<bool>& used) {
  double sw = 0.0, swt = 0.0, swy = 0.0;
  used.assign(t.size(), false);
  std::vector<double> w(t.size(), 0.0), y(t.size(), 0.0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (survivors(s[i]) < min_survivors) continue;
    const double p = s[i].estimate;
    w[i] = static_cast<double>(s[i].n_paths) * p / (1.0 - p);
    y[i] = std::log(p);
    used[i] = true;
    sw += w[i];
    swt += w[i] * t[i];
    swy += w[i] * y[i];
  }
  DecayFit f;
  f.used = static_cast<std::size_t>(std::count(used.begin(), used.end(), true));
  if (f.used < 2) return f;
  const double tb = swt / sw, yb = swy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!used[i]) continue;
    sxx += w[i] * (t[i] - tb) * (t[i] - tb);
    sxy += w[i] * (t[i] - tb) * (y[i] - yb);
  }
  f.rate = -sxy / sxx;
  f.half_width = kZ / std::sqrt(sxx);
  return f;
}

void check_eigen_bracket(Output& out) {
  const auto& ctx = out.ctx;
  const auto& b = ctx.bounds(out.spec.name);
  const auto e = b.eigen_bracket();
  const double t0 = b.t0();
  const auto times = nm::geomspace(out.spec.scalar("t_start", 3.0) * t0, out.spec.scalar("t_end", 10.0) * t0,
                                   static_cast<std::size_t>(out.spec.scalar("points", 8)));
  const auto x = interior_reference(b.domain());
  const auto sim_cfg = ctx.sim(out.spec);
  const auto s = Simulator(ctx.model(), sim_cfg).survival(b.domain(), x, times);
  std::vector<bool> used;
  const double min_surv = out.spec.scalar("min_survivors", 30);
  const auto fit = fit_decay(times, s, min_surv, used);
  auto& tab = out.table({"t", "empirical", "ci_low", "ci_high", "fit", "used"}, {"time", "1", "1", "1", "1", "flag"},
                        {"t", "empirical", "ci_low", "ci_high", "fit"});
  double c = 0.0;
  std::size_t nu = 0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (used[i]) {
      c += std::log(s[i].estimate) + fit.rate * times[i];
      ++nu;
    }
  }
  c = nu ? c / static_cast<double>(nu) : 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    tab.rows.push_back({times[i], s[i].estimate, s[i].lower, s[i].upper, std::exp(c - fit.rate * times[i]),
                        used[i] ? 1.0 : 0.0});
  }
  const std::string grid = "t in " + list_text({times.front(), times.back()}) + " (" + short_num(times.front() / t0) +
                           ".." + short_num(times.back() / t0) + " t0), " + std::to_string(times.size()) + " points";
  if (fit.used < 2) {
    out.row("decay-fit", grid, 0.0, 0.0, kInf, 0.0,
            "fewer than two times with >= " + short_num(min_surv) + " survivors out of " +
                std::to_string(sim_cfg.n_paths) + " paths");
    return;
  }
  const bool inside = fit.rate >= e.lambda_low && fit.rate <= e.lambda_high;
  std::size_t last = 0;
  for (std::size_t i = 0; i < used.size(); ++i) {
    if (used[i]) last = i;
  }
  out.row("decay-fit", grid, fit.rate / e.lambda_high, fit.rate / e.lambda_low, inside ? 0.0 : 1.0, 0.0,
          "rate " + short_num(fit.rate) + " +- " + short_num(fit.half_width) + " (95%, " + std::to_string(fit.used) +
              " times up to t=" + short_num(times[last]) + ") in bracket [" + short_num(e.lambda_low) + ", " +
              short_num(e.lambda_high) + "]");
}

void check_exit_time(Output& out) {
  const auto& ctx = out.ctx;
  const auto& b = ctx.bounds(out.spec.name);
  const auto& D = b.domain();
  const double s = D.inradius();
  const auto dists = out.spec.list("distances", nm::geomspace(0.05 * s, s, 6));
  const double t_max = out.spec.scalar("t_max", 1e3);
  auto& tab = out.table({"x", "mean_tau", "ci_low", "ci_high", "lower", "upper"},
                        {"length", "time", "time", "time", "time", "time"}, {"x", "mean_tau", "lower", "upper"});
  Simulator sim(ctx.model(), ctx.sim(out.spec));
  double worst = 0.0, lo = kInf, hi = 0.0;
  std::uint64_t censored = 0;
  for (double delta : dists) {
    const auto x = point_at_distance(D, delta);
    const auto paths = sim.run(D, x, t_max, {});
    double sum = 0.0, sq = 0.0;
    for (const auto& p : paths) {
      sum += p.exit.tau;
      sq += p.exit.tau * p.exit.tau;
      censored += !p.exit.exited;
    }
    const auto m = mean_stats(sum, sq, paths.size());
    const auto env = b.exit_time(x);
    tab.rows.push_back({D.dist(x), m.estimate, m.lower, m.upper, env.lower, env.upper});
    lo = std::min(lo, m.estimate / env.upper);
    hi = std::max(hi, m.estimate / env.lower);
    const double three = 3.0 * m.half_width / kZ;
    worst = std::max({worst, (m.estimate - three) / env.upper, env.lower / (m.estimate + three)});
  }
  out.row("E^x tau", std::to_string(dists.size()) + " distances " + list_text(dists), lo, hi, worst, out.ceiling(1.0),
          "statistic = max(mean/upper, lower/mean) at 3 sigma; censored paths " + std::to_string(censored));
}

void check_overshoot(Output& out) {
  const auto& ctx = out.ctx;
  const int d = ctx.model().dimension();
  const double rho = out.spec.scalar("radius", 0.5);
  const auto radii = out.spec.list("radii", {2.0 * rho, 4.0 * rho, 8.0 * rho});
  const double t_max = out.spec.scalar("t_max", 1e3);
  const auto D1 = Domain::ball(d, Point(d, 0.0), rho);
  const Point x(d, 0.0);
  const auto sim_cfg = ctx.sim(out.spec);
  const auto paths = Simulator(ctx.model(), sim_cfg).run(D1, x, t_max, {});
  double sum = 0.0, sq = 0.0;
  std::uint64_t censored = 0;
  for (const auto& p : paths) {
    sum += p.exit.tau;
    sq += p.exit.tau * p.exit.tau;
    censored += !p.exit.exited;
  }
  const auto tau = mean_stats(sum, sq, paths.size());
  const double c1 = ctx.profile().exit_c1;
  auto& tab = out.table({"r", "overshoot", "ci_low", "ci_high", "bound"}, {"length", "1", "1", "1", "1"},
                        {"r", "overshoot", "ci_low", "ci_high", "bound"});
  double lo = kInf, hi = 0.0, worst = 0.0, prev = 1.0;
  bool monotone = true;
  for (double r : radii) {
    std::uint64_t far = 0;
    for (const auto& p : paths) {
      if (!p.exit.exited) continue;
      double r2 = 0.0;
      for (double v : p.exit.post) r2 += v * v;
      far += std::sqrt(r2) >= r;
    }
    const auto st = wilson_stats(far, paths.size());
    const double v2 = std::pow(ctx.table().V(r), 2);
    const double bound = c1 * tau.estimate / v2;
    tab.rows.push_back({r, st.estimate, st.lower, st.upper, bound});
    const double measured = st.estimate * v2 / tau.estimate;
    lo = std::min(lo, measured);
    hi = std::max(hi, measured);
    const double p3 = std::max(0.0, st.estimate - 3.0 * st.half_width / kZ);
    const double tau3 = tau.estimate + 3.0 * tau.half_width / kZ;
    worst = std::max(worst, p3 * v2 / (c1 * tau3));
    monotone = monotone && st.estimate <= prev;
    prev = st.estimate;
  }
  out.row("ball radius " + short_num(rho), "r in " + list_text(radii), lo, hi, worst, out.ceiling(1.0),
          "measured C1 = P(|X_tau| >= r) V^2(r) / E tau in [" + short_num(lo) + ", " + short_num(hi) +
              "], profile C1 = " + short_num(c1) + ", E tau = " + short_num(tau.estimate) + ", censored " +
              std::to_string(censored) + (monotone ? "" : ", NOT monotone in r"));
}

void check_ikeda_watanabe(Output& out) {
  const auto& ctx = out.ctx;
  const auto& D = ctx.domain(out.spec.name);
  if (D.kind() != DomainKind::Interval) throw UnsupportedRegime("Ikeda-Watanabe check uses interval domains", "interval");
  const double L = D.hi() - D.lo();
  const double x = out.spec.scalar("x", 0.5 * (D.lo() + D.hi()));
  const auto offsets = out.spec.list("edges", {0.125 * L, 0.25 * L, 0.5 * L, L, 2.0 * L, 1e6});
  std::vector<std::pair<double, double>> ranges;
  for (std::size_t i = 0; i + 1 < offsets.size(); ++i) {
    ranges.emplace_back(D.hi() + offsets[i], D.hi() + offsets[i + 1]);
    ranges.emplace_back(D.lo() - offsets[i + 1], D.lo() - offsets[i]);
  }
  const auto bins = ikeda_watanabe_check(ctx.model(), D, x, ranges, ctx.sim(out.spec), out.spec.scalar("t_max", 1e3));
  auto& tab = out.table({"a", "b", "observed", "obs_half_width", "predicted", "pred_half_width"},
                        {"length", "length", "1", "1", "1", "1"}, {"a", "observed", "predicted"});
  double worst = 0.0, lo = kInf, hi = 0.0;
  for (const auto& b : bins) {
    tab.rows.push_back({b.a, b.b, b.observed.estimate, b.observed.half_width, b.predicted.estimate, b.predicted.half_width});
    const double sigma = std::hypot(b.observed.half_width, b.predicted.half_width) / kZ;
    if (sigma > 0.0) worst = std::max(worst, std::abs(b.observed.estimate - b.predicted.estimate) / (3.0 * sigma));
    if (b.predicted.estimate > 0.0) {
      lo = std::min(lo, b.observed.estimate / b.predicted.estimate);
      hi = std::max(hi, b.observed.estimate / b.predicted.estimate);
    }
  }
  out.row("jump exits", std::to_string(bins.size()) + " exterior bins", lo, hi, worst, out.ceiling(1.0),
          "statistic = max |observed - predicted| / 3 sigma");
}

BinSpec radial_bins(const Point& x, double r_max, std::size_t n) {
  return BinSpec{BinSpec::Kind::Radial, x, nm::linspace(0.0, r_max, n + 1)};
}

void check_ub_product(Output& out) {
  const auto& ctx = out.ctx;
  const auto& D = ctx.domain(out.spec.name);
  const double s = reference_scale(D);
  const double t = out.spec.scalar("t", 0.5 * std::pow(ctx.table().V(s), 2));
  const auto x = point_at_distance(D, out.spec.scalar("distance", 0.5 * s));
  const auto bins = radial_bins(x, out.spec.scalar("r_max", 2.0 * s), static_cast<std::size_t>(out.spec.scalar("bins", 10)));
  const auto sim_cfg = ctx.sim(out.spec);
  const std::vector<double> rec{0.5 * t, t};
  const auto paths = Simulator(ctx.model(), sim_cfg).run(D, x, t, rec);
  const int d = D.dimension();
  const auto half = histogram_from_paths(paths, 0, 0.5 * t, bins, d, sim_cfg.seed);
  const auto full = histogram_from_paths(paths, 1, t, bins, d, sim_cfg.seed);
  const double bound = p0(ctx.model(), 0.5 * t) * half.survival.estimate;
  const double bound3 = p0(ctx.model(), 0.5 * t) * (half.survival.estimate + 3.0 * half.survival.half_width / kZ);
  auto& tab = out.table({"r_lo", "r_hi", "density", "half_width", "bound"},
                        {"length", "length", "1/length^d", "1/length^d", "1/length^d"}, {"r_hi", "density", "bound"});
  double worst = 0.0, lo = kInf, hi = 0.0;
  for (std::size_t i = 0; i < full.density.size(); ++i) {
    const auto& e = full.density[i];
    tab.rows.push_back({bins.edges[i], bins.edges[i + 1], e.estimate, e.half_width, bound});
    lo = std::min(lo, e.estimate / bound);
    hi = std::max(hi, e.estimate / bound);
    worst = std::max(worst, std::max(0.0, e.estimate - 3.0 * e.half_width / kZ) / bound3);
  }
  out.row("t=" + short_num(t), std::to_string(full.density.size()) + " shells around x", lo, hi, worst,
          out.ceiling(1.0), "p_D(t,x,.) <= p0(t/2) P^x(tau > t/2) at 3 sigma; bound " + short_num(bound));
}

Domain enlarged(const Domain& D, double factor) {
  const int d = D.dimension();
  switch (D.kind()) {
    case DomainKind::Interval: {
      const double c = 0.5 * (D.lo() + D.hi()), h = 0.5 * (D.hi() - D.lo());
      return Domain::interval(c - factor * h, c + factor * h);
    }
    case DomainKind::Ball: return Domain::ball(d, D.center(), factor * D.radius());
    case DomainKind::ExteriorBall: return Domain::exterior_ball(d, D.center(), D.radius() / factor);
    case DomainKind::Halfspace: return Domain::halfspace(d, D.level() - (factor - 1.0));
    case DomainKind::HalfspaceLikeSlabBump:
      return Domain::halfspace_bump(d, D.level() - (factor - 1.0), D.low_level() - (factor - 1.0), D.width());
    case DomainKind::UnionTwoBalls: {
      Point c(d);
      double sep = 0.0;
      for (int k = 0; k < d; ++k) {
        c[k] = 0.5 * (D.center()[k] + D.center2()[k]);
        sep += std::pow(D.center()[k] - D.center2()[k], 2);
      }
      return Domain::ball(d, c, factor * (0.5 * std::sqrt(sep) + D.radius()));
    }
    case DomainKind::WholeSpace: break;
  }
  throw UnsupportedRegime("no larger domain than the whole space", "proper domain");
}

void check_domain_monotonicity(Output& out) {
  const auto& ctx = out.ctx;
  const auto& D = ctx.domain(out.spec.name);
  const auto big = enlarged(D, 2.0);
  const double s = reference_scale(D);
  const double t = out.spec.scalar("t", 0.5 * std::pow(ctx.table().V(s), 2));
  const auto x = point_at_distance(D, out.spec.scalar("distance", 0.5 * s));
  const auto bins = radial_bins(x, out.spec.scalar("r_max", 2.0 * s), static_cast<std::size_t>(out.spec.scalar("bins", 10)));
  const auto sim_cfg = ctx.sim(out.spec);
  const auto a = empirical_kernel(ctx.model(), D, t, x, bins, sim_cfg);
  const auto b = empirical_kernel(ctx.model(), big, t, x, bins, sim_cfg);
  auto& tab = out.table({"r_lo", "r_hi", "small", "large"}, {"length", "length", "1/length^d", "1/length^d"},
                        {"r_hi", "small", "large"});
  double worst = 0.0, lo = kInf, hi = 0.0;
  for (std::size_t i = 0; i < a.density.size(); ++i) {
    const auto& p = a.density[i];
    const auto& q = b.density[i];
    tab.rows.push_back({bins.edges[i], bins.edges[i + 1], p.estimate, q.estimate});
    if (q.estimate > 0.0) {
      lo = std::min(lo, p.estimate / q.estimate);
      hi = std::max(hi, p.estimate / q.estimate);
    }
    const double sigma = std::hypot(p.half_width, q.half_width) / kZ;
    worst = std::max(worst, (p.estimate - q.estimate) / (3.0 * sigma));
  }
  out.row(to_string(D.kind()) + " vs enlarged", "t=" + short_num(t) + ", " + std::to_string(a.density.size()) + " shells",
          lo, hi, worst, out.ceiling(1.0), "statistic = max (p_small - p_large) / 3 sigma; larger domain " + big.describe());
}

void check_chapman_kolmogorov(Output& out) {
  const auto& ctx = out.ctx;
  const auto& m = ctx.model();
  if (m.dimension() != 1) throw UnsupportedRegime("Chapman-Kolmogorov bins are one dimensional", "d = 1");
  const auto& D = ctx.domain(out.spec.name);
  const double s = reference_scale(D);
  const double t = out.spec.scalar("t", 0.25 * std::pow(ctx.table().V(s), 2));
  // free kernel: p_{2t}(r) against the numerical convolution
  {
    std::vector<double> ratios;
    for (double r : {0.0, 0.5 * s, s, 2.0 * s}) {
      auto f = [&](double z) { return p_free(m, t, std::abs(z)) * p_free(m, t, std::abs(r - z)); };
      // the product decays like nu^2 so the far tails are negligible
      const double Z = 1e3 * std::max(1.0, r);
      const double brk[] = {0.0, r};
      const double conv = nm::integrate(f, -Z, Z, brk, 1e-8);
      ratios.push_back(conv / p_free(m, 2.0 * t, r));
    }
    const double lo = min_of(ratios), hi = max_of(ratios);
    out.row("free", "r in [0, 2 scale], t=" + short_num(t), lo, hi, std::max({spread(lo, hi), hi, 1.0 / lo}), 1.001,
            "quadrature convolution of p_t with itself over p_2t");
  }
  double a = 0.0, b = 0.0;
  switch (D.kind()) {
    case DomainKind::Interval: a = D.lo(); b = D.hi(); break;
    case DomainKind::Ball: a = D.center()[0] - D.radius(); b = D.center()[0] + D.radius(); break;
    case DomainKind::Halfspace: a = D.level(); b = D.level() + out.spec.scalar("extent", 4.0 * s); break;
    default: throw UnsupportedRegime("killed Chapman-Kolmogorov needs an interval, ball or halfline", "d = 1 domain");
  }
  const auto nb = static_cast<std::size_t>(out.spec.scalar("bins", 8));
  const auto ni = static_cast<std::size_t>(out.spec.scalar("inner_bins", 24));
  const auto x = point_at_distance(D, out.spec.scalar("distance", 0.5 * s));
  const BinSpec outer{BinSpec::Kind::Box, {0.0}, nm::linspace(a, b, nb + 1)};
  const BinSpec inner{BinSpec::Kind::Box, {0.0}, nm::linspace(a, b, ni + 1)};
  const auto sim_cfg = ctx.sim(out.spec);
  Simulator sim(m, sim_cfg);
  const std::vector<double> rec{t, 2.0 * t};
  const auto paths = sim.run(D, x, 2.0 * t, rec);
  const auto first = histogram_from_paths(paths, 0, t, inner, 1, sim_cfg.seed);
  const auto target = histogram_from_paths(paths, 1, 2.0 * t, outer, 1, sim_cfg.seed);
  std::vector<double> pred(nb, 0.0), var(nb, 0.0);
  for (std::size_t j = 0; j < ni; ++j) {
    const double w = inner.volume(j, 1);
    const double pj = first.density[j].estimate * w;
    const double sj = first.density[j].half_width / kZ * w;
    if (first.counts[j] == 0) continue;
    const Point z = inner.midpoint(j, 1);
    if (!(D.dist(z) > 0.0)) continue;
    const auto next = histogram_from_paths(sim.run(D, z, t, std::vector<double>{t}), 0, t, outer, 1, sim_cfg.seed);
    for (std::size_t k = 0; k < nb; ++k) {
      const double q = next.density[k].estimate;
      const double sq = next.density[k].half_width / kZ;
      pred[k] += pj * q;
      var[k] += pj * pj * sq * sq + q * q * sj * sj;
    }
  }
  auto& tab = out.table({"y_lo", "y_hi", "p_2t", "p_2t_half_width", "convolution", "conv_sigma"},
                        {"length", "length", "1/length", "1/length", "1/length", "1/length"},
                        {"y_hi", "p_2t", "convolution"});
  double worst = 0.0, lo = kInf, hi = 0.0;
  for (std::size_t k = 0; k < nb; ++k) {
    const auto& e = target.density[k];
    tab.rows.push_back({outer.edges[k], outer.edges[k + 1], e.estimate, e.half_width, pred[k], std::sqrt(var[k])});
    const double sigma = std::sqrt(std::pow(e.half_width / kZ, 2) + var[k]);
    if (sigma > 0.0) worst = std::max(worst, std::abs(e.estimate - pred[k]) / (3.0 * sigma));
    if (pred[k] > 0.0) {
      lo = std::min(lo, e.estimate / pred[k]);
      hi = std::max(hi, e.estimate / pred[k]);
    }
  }
  out.row("killed", std::to_string(nb) + " bins on [" + short_num(a) + ", " + short_num(b) + "], " +
                        std::to_string(ni) + " inner bins, t=" + short_num(t),
          lo, hi, worst, out.ceiling(1.0), "statistic = max |p_2t - sum p_t p_t| / 3 sigma");
}

void check_v_product(Output& out) {
  const auto& table = out.ctx.table();
  const double t0 = out.spec.scalar("t0", std::pow(table.V(1.0), 2));
  const auto radii = nm::geomspace(1e-2, 10.0, static_cast<std::size_t>(out.spec.scalar("radii", 9)));
  const auto lambdas = out.spec.list("lambdas", {1.0, 2.0, 5.0, 20.0});
  const auto times = out.spec.list("times", {2.0 * t0, 10.0 * t0, 100.0 * t0});
  double worst = 0.0, lo = kInf, hi = 0.0;
  auto& tab = out.table({"t", "r", "lambda", "left", "middle", "right"}, {"time", "length", "1", "1", "1", "1"},
                        {"r", "left", "middle", "right"}, "t");
  for (double t : times) {
    for (double lam : lambdas) {
      for (double r : radii) {
        const auto v = v_product(table, t0, r, lam, t);
        tab.rows.push_back({t, r, lam, v.left, v.middle, v.right});
        worst = std::max({worst, v.left / v.middle, v.middle / v.right});
        lo = std::min(lo, v.middle / v.right);
        hi = std::max(hi, v.middle / v.left);
      }
    }
  }
  out.row("t0=" + short_num(t0),
          std::to_string(radii.size()) + " radii x " + std::to_string(lambdas.size()) + " lambdas x " +
              std::to_string(times.size()) + " times",
          lo, hi, worst, out.ceiling(1.0 + 1e-9), "statistic = max(left/middle, middle/right)");
}

using CheckFn = void (*)(Output&);

const std::map<std::string, CheckFn>& dispatch() {
  static const std::map<std::string, CheckFn> table{
      {"free-kernel-oracle", check_free_kernel_oracle},
      {"renewal-exactness", check_renewal_exactness},
      {"free-kernel-envelope", check_free_kernel_envelope},
      {"envelope-sandwich", check_envelope_sandwich},
      {"survival-factorization", check_survival_factorization},
      {"kernel-factorization", check_kernel_factorization},
      {"eigen-bracket", check_eigen_bracket},
      {"exit-time", check_exit_time},
      {"overshoot", check_overshoot},
      {"ikeda-watanabe", check_ikeda_watanabe},
      {"ub-product", check_ub_product},
      {"domain-monotonicity", check_domain_monotonicity},
      {"chapman-kolmogorov", check_chapman_kolmogorov},
      {"v-product", check_v_product},
  };
  return table;
}

std::string status_word(CheckStatus s) { return to_string(s); }

}  // namespace

// ---------------------------------------------------------------------------

std::string to_string(CheckStatus status) {
  switch (status) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::Skipped: return "skipped";
  }
  return "unknown";
}

CheckStatus check_status_from_string(const std::string& name) {
  if (name == "pass") return CheckStatus::Pass;
  if (name == "fail") return CheckStatus::Fail;
  if (name == "skipped") return CheckStatus::Skipped;
  throw Error("unknown check status '" + name + "'");
}

bool ReportRow::operator==(const ReportRow& o) const {
  return check == o.check && case_name == o.case_name && grid == o.grid && same(min_ratio, o.min_ratio) &&
         same(max_ratio, o.max_ratio) && same(statistic, o.statistic) && same(ceiling, o.ceiling) &&
         status == o.status && detail == o.detail && config_hash == o.config_hash;
}

bool ValidationReport::passed() const { return count(CheckStatus::Fail) == 0; }

std::size_t ValidationReport::count(CheckStatus status) const {
  return static_cast<std::size_t>(std::count_if(rows.begin(), rows.end(), [&](const ReportRow& r) { return r.status == status; }));
}

std::vector<std::string> ValidationReport::checks() const {
  std::vector<std::string> out;
  for (const auto& r : rows) {
    if (std::find(out.begin(), out.end(), r.check) == out.end()) out.push_back(r.check);
  }
  return out;
}

bool ValidationReport::operator==(const ValidationReport& o) const {
  return model == o.model && domain == o.domain && profile == o.profile && seed == o.seed &&
         config_hash == o.config_hash && rows == o.rows;
}

void ValidationReport::write_csv(std::ostream& out) const {
  out << "# heatlab validation report\n";
  out << "# model=" << model << "\n";
  out << "# domain=" << domain << "\n";
  out << "# profile=" << profile << "\n";
  out << "# seed=" << seed << "\n";
  out << "# config_hash=" << config_hash << "\n";
  out << "check,case,grid,min_ratio,max_ratio,statistic,ceiling,status,detail,config_hash\n";
  for (const auto& r : rows) {
    out << quote(r.check) << ',' << quote(r.case_name) << ',' << quote(r.grid) << ',' << num(r.min_ratio) << ','
        << num(r.max_ratio) << ',' << num(r.statistic) << ',' << num(r.ceiling) << ',' << to_string(r.status) << ','
        << quote(r.detail) << ',' << r.config_hash << "\n";
  }
}

ValidationReport ValidationReport::read_csv(std::istream& in) {
  ValidationReport rep;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const auto key = line.substr(2, eq - 2);
      const auto val = line.substr(eq + 1);
      if (key == "model") rep.model = val;
      else if (key == "domain") rep.domain = val;
      else if (key == "profile") rep.profile = val;
      else if (key == "seed") rep.seed = std::stoull(val);
      else if (key == "config_hash") rep.config_hash = val;
      continue;
    }
    if (!header) {
      header = true;
      continue;
    }
    const auto f = split_csv(line);
    if (f.size() != 10) throw Error("report row has " + std::to_string(f.size()) + " fields, expected 10");
    ReportRow r;
    r.check = f[0];
    r.case_name = f[1];
    r.grid = f[2];
    r.min_ratio = parse_num(f[3]);
    r.max_ratio = parse_num(f[4]);
    r.statistic = parse_num(f[5]);
    r.ceiling = parse_num(f[6]);
    r.status = check_status_from_string(f[7]);
    r.detail = f[8];
    r.config_hash = f[9];
    rep.rows.push_back(std::move(r));
  }
  if (!header) throw Error("not a heatlab report: missing column header");
  return rep;
}

void DataTable::write_csv(std::ostream& out) const {
  auto joined = [](const std::vector<std::string>& v, char sep) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : std::string(1, sep)) + x;
    return s;
  };
  out << "# check=" << check << "\n";
  out << "# units=" << joined(units, ' ') << "\n";
  out << "# plot=" << joined(plot, ' ') << "\n";
  out << "# block=" << block << "\n";
  out << joined(columns, ',') << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << num(row[i]);
    out << "\n";
  }
}

DataTable DataTable::read_csv(std::istream& in) {
  DataTable t;
  std::string line;
  auto words = [](const std::string& s) {
    std::vector<std::string> out;
    std::istringstream ss(s);
    std::string w;
    while (ss >> w) out.push_back(w);
    return out;
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const auto key = line.substr(2, eq - 2);
      const auto val = line.substr(eq + 1);
      if (key == "check") t.check = val;
      else if (key == "units") t.units = words(val);
      else if (key == "plot") t.plot = words(val);
      else if (key == "block") t.block = val;
      continue;
    }
    if (t.columns.empty()) {
      t.columns = split_csv(line);
      continue;
    }
    std::vector<double> row;
    for (const auto& f : split_csv(line)) row.push_back(parse_num(f));
    t.rows.push_back(std::move(row));
  }
  return t;
}

void DataTable::write_plotdata(std::ostream& out) const {
  std::vector<std::size_t> idx;
  for (const auto& p : plot) {
    auto it = std::find(columns.begin(), columns.end(), p);
    if (it == columns.end()) throw Error("plot column '" + p + "' missing from table " + check);
    idx.push_back(static_cast<std::size_t>(it - columns.begin()));
  }
  std::optional<std::size_t> block_col;
  if (!block.empty()) {
    auto it = std::find(columns.begin(), columns.end(), block);
    if (it != columns.end()) block_col = static_cast<std::size_t>(it - columns.begin());
  }
  out << "# heatlab plot data: " << check << "\n";
  out << "# columns:";
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const std::string unit = idx[k] < units.size() ? units[idx[k]] : "1";
    out << "  " << (k + 1) << ":" << columns[idx[k]] << " [" << unit << "]";
  }
  out << "\n";
  if (block_col) out << "# blocks separated by blank lines, one per " << block << "\n";
  std::optional<double> current;
  char buf[40];
  for (const auto& row : rows) {
    if (block_col) {
      const double b = row[*block_col];
      if (current && *current != b) out << "\n\n";
      if (!current || *current != b) out << "# " << block << " = " << num(b) << "\n";
      current = b;
    }
    for (std::size_t k = 0; k < idx.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%s%.10g", k ? " " : "", row[idx[k]]);
      out << buf;
    }
    out << "\n";
  }
}

ConstantProfile resolve_profile(const CampaignConfig& cfg, const ProcessModel& model) {
  if (cfg.profile.mode == "unit") return unit_profile();
  if (cfg.profile.mode == "file") return load_profile(cfg.profile.file);
  auto found = find_calibrated_profile(model, cfg.renewal.backend);
  if (!found) {
    throw ConfigError("no calibrated profile for " + model.describe() + " (fingerprint " + hex64(model.fingerprint()) +
                          ", backend " + to_string(cfg.renewal.backend) + ") in " + default_profile_dir().string() +
                          "; create one with `heatlab calibrate`",
                      "profile", 0);
  }
  return *found;
}

ConstantProfile calibrate_profile(const CampaignConfig& cfg) {
  CampaignConfig base = cfg;
  base.profile.mode = "unit";
  Context ctx(base);
  const auto& model = ctx.model();
  const auto& table = ctx.table();
  const int d = model.dimension();
  const auto& sc = ctx.scaling();
  if (!sc.local) throw UnsupportedRegime("no scaling certified for " + model.describe(), "WLSC and WUSC");
  const auto sim_cfg = cfg.simulation;
  ConstantProfile p;
  p.name = "calibrated";
  p.model_fingerprint = model.fingerprint();
  p.backend = to_string(cfg.renewal.backend);

  // kernel band on a grid offset from the one the checks use
  const auto win = envelope_window(ctx);
  const auto band = envelope_band(ctx, nm::geomspace(0.95 * win.t_lo, win.theta > 0.0 ? win.t_hi : 1.05 * win.t_hi, 15),
                                  nm::geomspace(0.95 * win.r_lo, win.theta > 0.0 ? win.r_hi : 1.05 * win.r_hi, 15),
                                  win.theta, nullptr);
  p.kernel_lower = std::min(1.0, 0.9 * band.lo);
  p.kernel_upper = std::max(1.0, 1.1 * band.hi);

  // reference ball, small enough that nu does not vanish across it
  const double R = std::min(1.0, 0.45 * model.support_radius());
  const auto ball = d == 1 ? Domain::interval(-R, R) : Domain::ball(d, Point(d, 0.0), R);
  Simulator sim(model, sim_cfg);
  const double t_max = 1e3 * std::pow(table.V(2.0 * R), 2);

  // expected exit time along a radius
  const std::size_t K = 8;
  double su = 0.0, su2 = 0.0, c1_exit = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    const double r = (static_cast<double>(k) + 0.5) / static_cast<double>(K) * R;
    Point x(d, 0.0);
    x[0] = r;
    const auto paths = sim.run(ball, x, t_max, {});
    double sum = 0.0;
    for (const auto& path : paths) sum += path.exit.tau;
    const double u = sum / static_cast<double>(paths.size());
    const double w = std::pow(r, d - 1);
    su += u * w;
    su2 += u * u * w;
    c1_exit = std::max(c1_exit, std::pow(table.V(R - r), 2) / u);
  }
  const double rayleigh = su / su2;
  p.eigen_c = std::max(1.0, 1.25 * rayleigh * std::pow(table.V(R), 2) / std::pow(2.0, 0.5 * d));

  // overshoot from the half ball
  const auto half = d == 1 ? Domain::interval(-0.5 * R, 0.5 * R) : Domain::ball(d, Point(d, 0.0), 0.5 * R);
  const auto out_paths = sim.run(half, Point(d, 0.0), t_max, {});
  double tau = 0.0, c1_over = 0.0;
  for (const auto& path : out_paths) tau += path.exit.tau;
  tau /= static_cast<double>(out_paths.size());
  for (double r : {R, 2.0 * R, 4.0 * R}) {
    std::uint64_t far = 0;
    for (const auto& path : out_paths) {
      double r2 = 0.0;
      for (double v : path.exit.post) r2 += v * v;
      far += path.exit.exited && std::sqrt(r2) >= r;
    }
    const auto st = wilson_stats(far, out_paths.size());
    c1_over = std::max(c1_over, st.upper * std::pow(table.V(r), 2) / tau);
  }
  p.exit_c1 = std::max(1.0, 1.25 * std::max(c1_exit, c1_over));

  // survival ratios against the structural factor, small and large time
  ConstantProfile partial = p;
  partial.survival_lower = partial.survival_upper = 1.0;
  partial.factorization_lower = partial.factorization_upper = 1.0;
  const DirichletBounds b(model, table, ball, partial);
  const double t0 = b.t0();
  const auto times = nm::geomspace(0.01 * t0, 3.0 * t0, 8);
  double lo = 1.0, hi = 1.0;
  for (double delta : nm::geomspace(0.02 * R, R, 6)) {
    Point x(d, 0.0);
    x[0] = R - delta;
    const auto s = sim.survival(ball, x, times);
    for (std::size_t i = 0; i < times.size(); ++i) {
      const auto env = b.survival(times[i], x);
      if (!(env.lower > 0.0) || s[i].estimate <= 0.0) continue;
      lo = std::min(lo, s[i].lower / env.lower);
      hi = std::max(hi, s[i].upper / env.upper);
    }
  }
  p.survival_lower = std::min(1.0, lo / 1.1);
  p.survival_upper = std::max(1.0, 1.1 * hi);
  p.factorization_lower = p.kernel_lower * p.survival_lower * p.survival_lower;
  p.factorization_upper = p.kernel_upper * p.survival_upper * p.survival_upper;

  p.provenance = "heatlab calibrate: kernel band on a 15x15 grid, survival and exit times on " + ball.describe() +
                 " with " + std::to_string(sim_cfg.n_paths) + " paths, seed " + std::to_string(sim_cfg.seed) +
                 ", Rayleigh rate " + short_num(rayleigh);
  p.validate();
  return p;
}

CampaignResult run_campaign(const CampaignConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  CampaignResult res;
  Context ctx(cfg);
  auto& rep = res.report;
  rep.model = ctx.model().describe();
  rep.domain = ctx.has_domain() ? ctx.domain("").describe() : "none";
  rep.profile = ctx.profile().name;
  rep.seed = cfg.simulation.seed;
  rep.config_hash = ctx.hash();
  for (const auto& w : IncrementSampler(ctx.model(), cfg.simulation).warnings(cfg.simulation.dt)) {
    res.warnings.push_back(w);
  }
  std::map<std::string, int> seen;
  for (const auto& spec : cfg.checks) {
    const auto check_start = std::chrono::steady_clock::now();
    const std::size_t first_table = res.tables.size();
    Output out{rep.rows, res.tables, ctx, spec};
    try {
      dispatch().at(spec.name)(out);
    } catch (const UnsupportedRegime& e) {
      ReportRow r;
      r.check = spec.name;
      r.case_name = "-";
      r.grid = "-";
      r.status = CheckStatus::Skipped;
      r.detail = std::string(e.what()) + " [requires " + e.hypothesis() + "]";
      r.config_hash = ctx.hash();
      rep.rows.push_back(r);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      ReportRow r;
      r.check = spec.name;
      r.case_name = "-";
      r.grid = "-";
      r.statistic = kInf;
      r.status = CheckStatus::Fail;
      r.detail = std::string("error: ") + e.what();
      r.config_hash = ctx.hash();
      rep.rows.push_back(r);
    }
    res.check_seconds.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - check_start).count());
    const int n = ++seen[spec.name];
    if (n > 1) {
      for (std::size_t i = first_table; i < res.tables.size(); ++i) res.tables[i].check += "-" + std::to_string(n);
    }
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

void write_campaign(const CampaignResult& result, const CampaignConfig& cfg, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "report.csv");
    result.report.write_csv(out);
  }
  for (const auto& t : result.tables) {
    std::ofstream out(dir / (t.check + ".csv"));
    t.write_csv(out);
  }
  std::ofstream s(dir / "summary.txt");
  const auto& r = result.report;
  s << "heatlab campaign " << cfg.source.string() << "\n";
  s << "model    " << r.model << "\n";
  s << "domain   " << r.domain << "\n";
  s << "profile  " << r.profile << "\n";
  s << "seed     " << r.seed << "\n";
  s << "config   " << r.config_hash << "\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f s", result.seconds);
  s << "runtime  " << buf << "\n\n";
  for (const auto& w : result.warnings) s << "warning: " << w << "\n";
  for (std::size_t i = 0; i < result.check_seconds.size() && i < cfg.checks.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%9.2f s  ", result.check_seconds[i]);
    s << buf << cfg.checks[i].name << "\n";
  }
  s << "\n";
  for (const auto& row : r.rows) {
    std::snprintf(buf, sizeof buf, "%-8s", status_word(row.status).c_str());
    s << buf << row.check << " [" << row.case_name << "] ";
    if (row.status != CheckStatus::Skipped) {
      s << "ratio " << short_num(row.min_ratio) << ".." << short_num(row.max_ratio) << ", statistic "
        << short_num(row.statistic) << " <= " << short_num(row.ceiling) << "? ";
    }
    s << row.detail << "\n";
  }
  s << "\n" << r.count(CheckStatus::Pass) << " passed, " << r.count(CheckStatus::Fail) << " failed, "
    << r.count(CheckStatus::Skipped) << " skipped\n";
}

void emit_plotdata(const std::filesystem::path& report, const std::string& check, std::ostream& out) {
  std::ifstream rin(report);
  if (!rin) throw Error("cannot open report " + report.string());
  const auto rep = ValidationReport::read_csv(rin);
  const auto names = rep.checks();
  const auto dir = report.parent_path();
  const auto file = dir / (check + ".csv");
  const bool listed = std::find(names.begin(), names.end(), check) != names.end();
  if (!listed || !std::filesystem::exists(file)) {
    std::string avail;
    for (const auto& n : names) {
      if (std::filesystem::exists(dir / (n + ".csv"))) avail += (avail.empty() ? "" : ", ") + n;
    }
    throw Error("no plot data for check '" + check + "' in " + report.string() + " (available: " +
                (avail.empty() ? "none" : avail) + ")");
  }
  std::ifstream tin(file);
  DataTable::read_csv(tin).write_plotdata(out);
}

}  // namespace heatlab
