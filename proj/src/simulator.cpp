#include "heatlab/simulator.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <random>
#include <mutex>
#include <thread>

#include "heatlab/errors.hpp"
#include "heatlab/numerics.hpp"

namespace heatlab {

namespace nm = numerics;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kZ = 1.959963984540054;
constexpr std::size_t kTablePoints = 481;
constexpr double kTableDecades = 6.0;

enum Substream : std::uint32_t { kMain = 0, kBridge = 1, kRefine = 2 };

using Vec = std::array<double, 3>;

template <class Fn>
void parallel_paths(std::uint64_t n, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, std::max<std::uint64_t>(1, n / 64)));
  if (threads <= 1) {
    for (std::uint64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  constexpr std::uint64_t kChunk = 256;
  std::atomic<std::uint64_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      try {
        for (;;) {
          const std::uint64_t lo = next.fetch_add(kChunk);
          if (lo >= n) return;
          const std::uint64_t hi = std::min(n, lo + kChunk);
          for (std::uint64_t i = lo; i < hi; ++i) fn(i);
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n);
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

Point to_point(const Vec& v, int d) { return Point(v.begin(), v.begin() + d); }

}  // namespace

std::string to_string(SmallJumpMode mode) {
  return mode == SmallJumpMode::GaussianMatch ? "gaussian-match" : "drop";
}

SmallJumpMode small_jump_mode_from_string(const std::string& name) {
  if (name == "gaussian-match") return SmallJumpMode::GaussianMatch;
  if (name == "drop") return SmallJumpMode::Drop;
  throw DomainError("unknown small-jump mode '" + name + "' (expected gaussian-match or drop)");
}

void SimConfig::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw DomainError("epsilon must be positive");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DomainError("dt must be positive");
  if (n_paths < 1) throw DomainError("n_paths must be at least 1");
  if (exit_refinement < 0) throw DomainError("exit_refinement must be nonnegative");
  if (!(dt_growth >= 0.0)) throw DomainError("dt_growth must be nonnegative");
}

EmpiricalStats wilson_stats(std::uint64_t k, std::uint64_t n) {
  EmpiricalStats s;
  s.n_paths = n;
  s.estimator = "wilson";
  if (n == 0) return s;
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = kZ * kZ;
  const double denom = 1.0 + z2 / nn;
  const double centre = (p + z2 / (2.0 * nn)) / denom;
  const double hw = kZ / denom * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
  s.estimate = p;
  s.lower = std::max(0.0, centre - hw);
  s.upper = std::min(1.0, centre + hw);
  s.half_width = hw;
  return s;
}

EmpiricalStats mean_stats(double sum, double sum_sq, std::uint64_t n) {
  EmpiricalStats s;
  s.n_paths = n;
  s.estimator = "normal-mean";
  if (n == 0) return s;
  const double nn = static_cast<double>(n);
  const double mean = sum / nn;
  const double var = n > 1 ? std::max(0.0, (sum_sq - nn * mean * mean) / (nn - 1.0)) : 0.0;
  s.estimate = mean;
  s.half_width = kZ * std::sqrt(var / nn);
  s.lower = mean - s.half_width;
  s.upper = mean + s.half_width;
  return s;
}

IncrementSampler::IncrementSampler(const ProcessModel& model, const SimConfig& cfg)
    : d_(model.dimension()), epsilon_(cfg.epsilon) {
  cfg.validate();
  support_ = model.support_radius();
  rate_ = epsilon_ < support_ ? model.tail_mass(epsilon_) : 0.0;
  sigma2_ = cfg.small_jump_mode == SmallJumpMode::GaussianMatch ? model.second_moment(epsilon_) / d_ : 0.0;
  big_second_moment_ = std::isfinite(support_) && rate_ > 0.0
                           ? model.second_moment(support_) - model.second_moment(epsilon_)
                           : (rate_ > 0.0 ? kInf : 0.0);
  if (!(rate_ > 0.0)) return;
  const bool finite_support = std::isfinite(support_);
  const double s_hi = finite_support ? support_ : epsilon_ * std::pow(10.0, kTableDecades);
  const auto s = nm::geomspace(epsilon_, s_hi, kTablePoints);
  log_s_.resize(s.size());
  frac_.resize(s.size());
  log_frac_.resize(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    log_s_[i] = std::log(s[i]);
    frac_[i] = i == 0 ? 1.0 : std::min(frac_[i - 1], model.tail_mass(s[i]) / rate_);
    log_frac_[i] = std::log(frac_[i]);
  }
  // a tail that underflows is cut where it reaches zero
  const auto zero = std::find(frac_.begin(), frac_.end(), 0.0);
  if (!finite_support && zero != frac_.end()) {
    const auto keep = static_cast<std::size_t>(zero - frac_.begin()) + 1;
    log_s_.resize(keep);
    frac_.resize(keep);
    log_frac_.resize(keep);
  }
  if (finite_support || zero != frac_.end()) {
    frac_.back() = 0.0;
    log_frac_.back() = -kInf;
  } else {
    const std::size_t n = s.size();
    tail_slope_ = (log_frac_[n - 1] - log_frac_[n - 2]) / (log_s_[n - 1] - log_s_[n - 2]);
    if (!(tail_slope_ < 0.0)) throw ModelInvalid("Levy tail does not decay at large radii");
  }
}

double IncrementSampler::sample_jump_radius(PhiloxStream& rng) const {
  const double u = rng.uniform();
  const double last = frac_.back();
  if (u <= last) {
    // power-law tail past the table
    return std::exp(log_s_.back() + (std::log(u) - log_frac_.back()) / tail_slope_);
  }
  // first index with frac < u; frac is nonincreasing
  auto it = std::upper_bound(frac_.begin(), frac_.end(), u, std::greater<>());
  const auto j = static_cast<std::size_t>(it - frac_.begin());
  const std::size_t i = j - 1;
  const double f0 = frac_[i], f1 = frac_[j];
  if (f1 > 0.0 && f0 > f1) {
    const double w = (std::log(u) - log_frac_[i]) / (log_frac_[j] - log_frac_[i]);
    return std::exp(log_s_[i] + w * (log_s_[j] - log_s_[i]));
  }
  const double w = f0 > f1 ? (f0 - u) / (f0 - f1) : 0.0;
  return std::exp(log_s_[i]) + w * (std::exp(log_s_[j]) - std::exp(log_s_[i]));
}

void IncrementSampler::sample_direction(PhiloxStream& rng, std::span<double> out) const {
  if (d_ == 1) {
    out[0] = (rng() >> 63) ? 1.0 : -1.0;
    return;
  }
  std::normal_distribution<double> g;
  double n2 = 0.0;
  do {
    n2 = 0.0;
    for (int k = 0; k < d_; ++k) {
      out[k] = g(rng);
      n2 += out[k] * out[k];
    }
  } while (n2 == 0.0);
  const double inv = 1.0 / std::sqrt(n2);
  for (int k = 0; k < d_; ++k) out[k] *= inv;
}

Point IncrementSampler::sample_increment(double dt, PhiloxStream& rng) const {
  Point out(d_, 0.0);
  if (rate_ > 0.0) {
    std::poisson_distribution<long> count(rate_ * dt);
    const long n = count(rng);
    Vec dir{};
    for (long j = 0; j < n; ++j) {
      const double r = sample_jump_radius(rng);
      sample_direction(rng, std::span<double>(dir.data(), d_));
      for (int k = 0; k < d_; ++k) out[k] += r * dir[k];
    }
  }
  if (sigma2_ > 0.0) {
    std::normal_distribution<double> g;
    const double sd = std::sqrt(sigma2_ * dt);
    for (int k = 0; k < d_; ++k) out[k] += sd * g(rng);
  }
  return out;
}

double IncrementSampler::big_jump_tail(double s) const {
  if (!(rate_ > 0.0)) return 0.0;
  if (s <= epsilon_) return rate_;
  if (s >= support_) return 0.0;
  const double ls = std::log(s);
  if (ls >= log_s_.back()) return rate_ * std::exp(log_frac_.back() + tail_slope_ * (ls - log_s_.back()));
  auto it = std::upper_bound(log_s_.begin(), log_s_.end(), ls);
  const auto j = static_cast<std::size_t>(it - log_s_.begin());
  const std::size_t i = j - 1;
  const double w = (ls - log_s_[i]) / (log_s_[j] - log_s_[i]);
  if (frac_[j] > 0.0) return rate_ * std::exp(log_frac_[i] + w * (log_frac_[j] - log_frac_[i]));
  return rate_ * frac_[i] * (1.0 - w);
}

double IncrementSampler::second_moment(double dt) const {
  return dt * (d_ * sigma2_ + big_second_moment_);
}

std::vector<std::string> IncrementSampler::warnings(double dt) const {
  std::vector<std::string> out;
  if (rate_ * dt > 10.0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "big-jump rate L(epsilon)*dt = %.3g exceeds 10; shrink dt", rate_ * dt);
    out.emplace_back(buf);
  }
  return out;
}

Simulator::Simulator(ProcessModel model, SimConfig cfg)
    : model_(std::move(model)), cfg_(cfg), sampler_(std::make_shared<IncrementSampler>(model_, cfg_)) {}

Simulator::PathResult Simulator::run_path(const Domain& domain, std::span<const double> x0, double t_max,
                                          std::span<const double> record_times, std::uint64_t path_index,
                                          const OccupationFn& occupation, std::span<double> acc) const {
  const int d = model_.dimension();
  if (static_cast<int>(x0.size()) != d || domain.dimension() != d) {
    throw DomainError("start point, domain and model dimensions differ");
  }
  const auto& smp = *sampler_;
  PathResult res;
  res.positions.resize(record_times.size());
  PhiloxStream main(cfg_.seed, path_index, kMain);
  PhiloxStream bridge(cfg_.seed, path_index, kBridge);
  std::normal_distribution<double> gauss;
  std::exponential_distribution<double> wait(smp.jump_rate() > 0.0 ? smp.jump_rate() : 1.0);

  Vec x{}, y{}, dir{};
  std::copy(x0.begin(), x0.end(), x.begin());
  const std::span<double> xs(x.data(), d), ys(y.data(), d);
  if (!domain.contains(xs)) {
    res.exit = {true, false, 0.0, to_point(x, d), to_point(x, d)};
    return res;
  }
  const double sigma2 = smp.gaussian_variance();
  double t = 0.0;
  double next_jump = smp.jump_rate() > 0.0 ? wait(main) : kInf;
  std::size_t rec = 0;

  auto finish = [&](double tau, bool by_jump, const Vec& pre, const Vec& post) {
    res.exit = {true, by_jump, tau, to_point(pre, d), to_point(post, d)};
  };

  for (;;) {
    while (rec < record_times.size() && record_times[rec] <= t) res.positions[rec++] = to_point(x, d);
    if (t >= t_max) break;
    const double step = std::max(cfg_.dt, cfg_.dt_growth * t);
    double t_next = std::min({next_jump, t + step, t_max});
    if (rec < record_times.size()) t_next = std::min(t_next, record_times[rec]);
    const double h = t_next - t;
    if (occupation) occupation(xs, h, acc);
    if (sigma2 > 0.0) {
      const double sd = std::sqrt(sigma2 * h);
      for (int k = 0; k < d; ++k) y[k] = x[k] + sd * gauss(main);
      const double u = bridge.uniform();
      if (!domain.contains(ys)) {
        // bisect the Brownian bridge for the crossing time
        PhiloxStream refine(cfg_.seed, path_index, kRefine);
        std::normal_distribution<double> g2;
        double ta = t, tb = t_next;
        Vec a = x, b = y, m{};
        for (int level = 0; level < cfg_.exit_refinement; ++level) {
          const double sdm = std::sqrt(sigma2 * (tb - ta) / 4.0);
          for (int k = 0; k < d; ++k) m[k] = 0.5 * (a[k] + b[k]) + sdm * g2(refine);
          const double tm = 0.5 * (ta + tb);
          if (domain.contains(std::span<const double>(m.data(), d))) {
            a = m;
            ta = tm;
          } else {
            b = m;
            tb = tm;
          }
        }
        finish(0.5 * (ta + tb), false, b, b);
        break;
      }
      const double d0 = domain.dist(xs), d1 = domain.dist(ys);
      if (u < std::exp(-2.0 * d0 * d1 / (sigma2 * h))) {
        finish(t + 0.5 * h, false, y, y);
        break;
      }
      x = y;
    }
    t = t_next;
    if (t == next_jump) {
      const double r = smp.sample_jump_radius(main);
      smp.sample_direction(main, std::span<double>(dir.data(), d));
      for (int k = 0; k < d; ++k) y[k] = x[k] + r * dir[k];
      if (!domain.contains(ys)) {
        finish(t, true, x, y);
        break;
      }
      x = y;
      next_jump = t + wait(main);
    }
  }
  if (!res.exit.exited) {
    res.exit.tau = t;
    res.exit.pre = res.exit.post = to_point(x, d);
  }
  return res;
}

std::vector<Simulator::PathResult> Simulator::run(const Domain& domain, std::span<const double> x, double t_max,
                                                  std::span<const double> record_times) const {
  if (!std::is_sorted(record_times.begin(), record_times.end())) throw DomainError("record times must be increasing");
  std::vector<PathResult> out(cfg_.n_paths);
  parallel_paths(cfg_.n_paths, cfg_.threads,
                 [&](std::uint64_t i) { out[i] = run_path(domain, x, t_max, record_times, i); });
  return out;
}

std::vector<EmpiricalStats> Simulator::survival(const Domain& domain, std::span<const double> x,
                                                std::span<const double> times) const {
  if (times.empty()) return {};
  for (double t : times) {
    if (!(t >= 0.0)) throw DomainError("survival times must be nonnegative");
  }
  if (!std::is_sorted(times.begin(), times.end())) throw DomainError("survival times must be increasing");
  const auto paths = run(domain, x, times.back(), {});
  std::vector<EmpiricalStats> out;
  for (double t : times) {
    std::uint64_t alive = 0;
    for (const auto& p : paths) alive += (!p.exit.exited || p.exit.tau > t) ? 1 : 0;
    auto s = wilson_stats(alive, cfg_.n_paths);
    s.seed = cfg_.seed;
    s.estimator = "survival-wilson";
    out.push_back(s);
  }
  return out;
}

ExitRecord simulate_until_exit(const ProcessModel& model, const Domain& domain, std::span<const double> x,
                               double t_max, const SimConfig& cfg, std::uint64_t path_index) {
  return Simulator(model, cfg).run_path(domain, x, t_max, {}, path_index).exit;
}

std::vector<EmpiricalStats> empirical_survival(const ProcessModel& model, const Domain& domain,
                                               std::span<const double> x, std::span<const double> times,
                                               const SimConfig& cfg) {
  return Simulator(model, cfg).survival(domain, x, times);
}

std::size_t BinSpec::size(int d) const {
  if (edges.size() < 2) return 0;
  const std::size_t m = edges.size() - 1;
  if (kind == Kind::Radial) return m;
  std::size_t n = 1;
  for (int k = 0; k < d; ++k) n *= m;
  return n;
}

long BinSpec::locate(std::span<const double> y) const {
  if (edges.size() < 2) return -1;
  auto index = [&](double v) -> long {
    if (v < edges.front() || v >= edges.back()) return -1;
    return static_cast<long>(std::upper_bound(edges.begin(), edges.end(), v) - edges.begin()) - 1;
  };
  if (kind == Kind::Radial) {
    double r2 = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) r2 += (y[k] - center[k]) * (y[k] - center[k]);
    return index(std::sqrt(r2));
  }
  const long m = static_cast<long>(edges.size()) - 1;
  long flat = 0, stride = 1;
  for (std::size_t k = 0; k < y.size(); ++k) {
    const long i = index(y[k] - center[k]);
    if (i < 0) return -1;
    flat += i * stride;
    stride *= m;
  }
  return flat;
}

double BinSpec::volume(std::size_t bin, int d) const {
  if (kind == Kind::Radial) {
    return nm::sphere_area(d) / d * (std::pow(edges[bin + 1], d) - std::pow(edges[bin], d));
  }
  const std::size_t m = edges.size() - 1;
  double v = 1.0;
  for (int k = 0; k < d; ++k) {
    const std::size_t i = bin % m;
    bin /= m;
    v *= edges[i + 1] - edges[i];
  }
  return v;
}

Point BinSpec::midpoint(std::size_t bin, int d) const {
  Point p = center.empty() ? Point(d, 0.0) : center;
  if (kind == Kind::Radial) {
    p[0] += 0.5 * (edges[bin] + edges[bin + 1]);
    return p;
  }
  const std::size_t m = edges.size() - 1;
  for (int k = 0; k < d; ++k) {
    const std::size_t i = bin % m;
    bin /= m;
    p[k] += 0.5 * (edges[i] + edges[i + 1]);
  }
  return p;
}

double KernelHistogram::mass() const {
  const int d = bins.center.empty() ? 1 : static_cast<int>(bins.center.size());
  double m = 0.0;
  for (std::size_t i = 0; i < density.size(); ++i) m += density[i].estimate * bins.volume(i, d);
  return m;
}

KernelHistogram histogram_from_paths(const std::vector<Simulator::PathResult>& paths, std::size_t record,
                                     double t, const BinSpec& bins, int d, std::uint64_t seed) {
  KernelHistogram h;
  h.bins = bins;
  if (h.bins.center.empty()) h.bins.center.assign(d, 0.0);
  h.t = t;
  const std::size_t nb = bins.size(d);
  h.counts.assign(nb, 0);
  std::uint64_t alive = 0;
  for (const auto& p : paths) {
    const auto& pos = p.positions[record];
    if (pos.empty()) continue;
    ++alive;
    const long b = h.bins.locate(pos);
    if (b >= 0) ++h.counts[static_cast<std::size_t>(b)];
  }
  const double n = static_cast<double>(paths.size());
  h.density.resize(nb);
  for (std::size_t i = 0; i < nb; ++i) {
    auto& s = h.density[i];
    const double scale = 1.0 / (n * h.bins.volume(i, d));
    const double c = static_cast<double>(h.counts[i]);
    s.estimate = c * scale;
    s.n_paths = paths.size();
    s.seed = seed;
    if (h.counts[i] == 0) {
      s.estimator = "rule-of-three";
      s.half_width = 3.0 * scale;
      s.lower = 0.0;
      s.upper = s.half_width;
    } else {
      s.estimator = "poisson-normal";
      s.half_width = kZ * std::sqrt(c) * scale;
      s.lower = std::max(0.0, s.estimate - s.half_width);
      s.upper = s.estimate + s.half_width;
    }
  }
  h.survival = wilson_stats(alive, paths.size());
  h.survival.seed = seed;
  return h;
}

KernelHistogram empirical_kernel(const ProcessModel& model, const Domain& domain, double t,
                                 std::span<const double> x, const BinSpec& bins, const SimConfig& cfg) {
  if (!(t > 0.0)) throw DomainError("kernel time must be positive");
  Simulator sim(model, cfg);
  const std::array<double, 1> rec{t};
  const auto paths = sim.run(domain, x, t, rec);
  return histogram_from_paths(paths, 0, t, bins, model.dimension(), cfg.seed);
}

ExitStats empirical_overshoot(const ProcessModel& model, const Domain& ball, std::span<const double> x, double r,
                              const SimConfig& cfg, double t_max) {
  if (ball.kind() != DomainKind::Ball && ball.kind() != DomainKind::Interval) {
    throw DomainError("overshoot needs a ball-type domain");
  }
  Point c = ball.kind() == DomainKind::Ball ? ball.center() : Point{0.5 * (ball.lo() + ball.hi())};
  Simulator sim(model, cfg);
  const auto paths = sim.run(ball, x, t_max, {});
  std::uint64_t exited = 0, far = 0, censored = 0;
  double sum = 0.0, sum_sq = 0.0;
  for (const auto& p : paths) {
    const double tau = p.exit.tau;
    sum += tau;
    sum_sq += tau * tau;
    if (!p.exit.exited) {
      ++censored;
      continue;
    }
    ++exited;
    double r2 = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) r2 += (p.exit.post[k] - c[k]) * (p.exit.post[k] - c[k]);
    if (std::sqrt(r2) >= r) ++far;
  }
  ExitStats s;
  s.exited = wilson_stats(exited, paths.size());
  s.overshoot = wilson_stats(far, paths.size());
  s.overshoot.estimator = "overshoot-wilson";
  s.mean_tau = mean_stats(sum, sum_sq, paths.size());
  s.mean_tau.estimator = "exit-time-mean";
  s.exited.seed = s.overshoot.seed = s.mean_tau.seed = cfg.seed;
  s.censored = censored;
  return s;
}

std::vector<IkedaWatanabeBin> ikeda_watanabe_check(const ProcessModel& model, const Domain& interval, double x,
                                                   std::span<const std::pair<double, double>> ranges,
                                                   const SimConfig& cfg, double t_max) {
  if (interval.kind() != DomainKind::Interval) throw DomainError("Ikeda-Watanabe check needs an interval");
  if (ranges.empty()) return {};
  const double lo = interval.lo(), hi = interval.hi();
  std::vector<IkedaWatanabeBin> bins;
  for (const auto& [a, b] : ranges) {
    if (!(b > a) || (a < hi && b > lo)) throw DomainError("Ikeda-Watanabe bins must lie outside the interval");
    bins.push_back({a, b, {}, {}});
  }
  Simulator sim(model, cfg);
  const auto& smp = sim.sampler();
  const std::size_t nb = bins.size();
  auto rate_into = [&](double pos, std::span<double> acc, double h) {
    for (std::size_t j = 0; j < nb; ++j) {
      const double a = bins[j].a, b = bins[j].b;
      double m = 0.0;
      if (a >= pos) m = smp.big_jump_tail(a - pos) - smp.big_jump_tail(b - pos);
      else if (b <= pos) m = smp.big_jump_tail(pos - b) - smp.big_jump_tail(pos - a);
      acc[j] += 0.5 * h * m;
    }
  };
  const Simulator::OccupationFn occ = [&](std::span<const double> p, double h, std::span<double> acc) {
    rate_into(p[0], acc, h);
  };
  std::vector<double> acc(cfg.n_paths * nb, 0.0);
  std::vector<long> landed(cfg.n_paths, -1);
  const std::array<double, 1> start{x};
  parallel_paths(cfg.n_paths, cfg.threads, [&](std::uint64_t i) {
    std::span<double> mine(acc.data() + i * nb, nb);
    const auto r = sim.run_path(interval, start, t_max, {}, i, occ, mine);
    if (r.exit.exited && r.exit.by_jump) {
      const double y = r.exit.post[0];
      for (std::size_t j = 0; j < nb; ++j) {
        if (y >= bins[j].a && y < bins[j].b) landed[i] = static_cast<long>(j);
      }
    }
  });
  for (std::size_t j = 0; j < nb; ++j) {
    std::uint64_t k = 0;
    double sum = 0.0, sum_sq = 0.0;
    for (std::uint64_t i = 0; i < cfg.n_paths; ++i) {
      if (landed[i] == static_cast<long>(j)) ++k;
      const double v = acc[i * nb + j];
      sum += v;
      sum_sq += v * v;
    }
    bins[j].observed = wilson_stats(k, cfg.n_paths);
    bins[j].observed.seed = cfg.seed;
    bins[j].predicted = mean_stats(sum, sum_sq, cfg.n_paths);
    bins[j].predicted.seed = cfg.seed;
    bins[j].predicted.estimator = "occupation-mean";
  }
  return bins;
}

void write_exit_csv(std::ostream& out, const std::vector<Simulator::PathResult>& paths, const SimConfig& cfg,
                    const std::string& model, const std::string& domain) {
  char buf[64];
  out << "# model=" << model << " domain=" << domain << "\n";
  out << "# seed=" << cfg.seed << " n_paths=" << cfg.n_paths;
  std::snprintf(buf, sizeof buf, " epsilon=%.17g dt=%.17g", cfg.epsilon, cfg.dt);
  out << buf << " small_jump_mode=" << to_string(cfg.small_jump_mode) << " exit_refinement=" << cfg.exit_refinement;
  std::snprintf(buf, sizeof buf, " dt_growth=%.17g", cfg.dt_growth);
  out << buf << "\n";
  const int d = paths.empty() ? 0 : static_cast<int>(paths.front().exit.pre.size());
  out << "path,exited,by_jump,tau";
  for (int k = 0; k < d; ++k) out << ",pre" << k;
  for (int k = 0; k < d; ++k) out << ",post" << k;
  out << "\n";
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const auto& e = paths[i].exit;
    std::snprintf(buf, sizeof buf, "%.17g", e.tau);
    out << i << ',' << int(e.exited) << ',' << int(e.by_jump) << ',' << buf;
    for (int k = 0; k < d; ++k) {
      std::snprintf(buf, sizeof buf, ",%.17g", k < static_cast<int>(e.pre.size()) ? e.pre[k] : 0.0);
      out << buf;
    }
    for (int k = 0; k < d; ++k) {
      std::snprintf(buf, sizeof buf, ",%.17g", k < static_cast<int>(e.post.size()) ? e.post[k] : 0.0);
      out << buf;
    }
    out << "\n";
  }
}

}  // namespace heatlab
