#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "heatlab/geometry.hpp"
#include "heatlab/philox.hpp"
#include "heatlab/process_models.hpp"

namespace heatlab {

enum class SmallJumpMode { GaussianMatch, Drop };
std::string to_string(SmallJumpMode mode);
SmallJumpMode small_jump_mode_from_string(const std::string& name);

struct SimConfig {
  double epsilon = 0.02;
  /// Base time step of the diffusive part.
  double dt = 1e-4;
  std::uint64_t n_paths = 10000;
  std::uint64_t seed = 1;
  SmallJumpMode small_jump_mode = SmallJumpMode::GaussianMatch;
  int exit_refinement = 8;
  /// Steps grow to dt_growth * t at later times (0 keeps them at dt).
  double dt_growth = 0.02;
  /// 0 uses all hardware threads.
  unsigned threads = 0;

  /// Throws DomainError on invalid values.
  void validate() const;
};

struct EmpiricalStats {
  double estimate = 0.0;
  /// Half width of the 95% interval.
  double half_width = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::uint64_t n_paths = 0;
  std::uint64_t seed = 0;
  std::string estimator;
};

/// Wilson 95% interval for k successes out of n.
EmpiricalStats wilson_stats(std::uint64_t k, std::uint64_t n);
/// Normal 95% interval for a sample mean.
EmpiricalStats mean_stats(double sum, double sum_sq, std::uint64_t n);

/// Jumps larger than epsilon as a compound Poisson process, the rest as a
/// matched Gaussian (or dropped).
class IncrementSampler {
 public:
  IncrementSampler(const ProcessModel& model, const SimConfig& cfg);

  int dimension() const { return d_; }
  /// L(epsilon), the big-jump rate.
  double jump_rate() const { return rate_; }
  /// Per-coordinate Gaussian variance per unit time.
  double gaussian_variance() const { return sigma2_; }
  double epsilon() const { return epsilon_; }
  /// Radial size of one big jump.
  double sample_jump_radius(PhiloxStream& rng) const;
  /// Uniform direction on the unit sphere.
  void sample_direction(PhiloxStream& rng, std::span<double> out) const;
  /// Displacement over dt (jumps and Gaussian part).
  Point sample_increment(double dt, PhiloxStream& rng) const;
  /// nu(B_s^c \ B_epsilon^c) interpolated from the sampling table, s >= 0.
  double big_jump_tail(double s) const;
  /// E|increment|^2 over dt for the simulated process.
  double second_moment(double dt) const;
  /// Warnings about the step/cutoff choice.
  std::vector<std::string> warnings(double dt) const;

 private:
  int d_;
  double epsilon_;
  double rate_;
  double sigma2_;
  double big_second_moment_;
  double support_;
  // ln s against tail fraction F = L(s) / L(epsilon), decreasing in F
  std::vector<double> log_s_, frac_, log_frac_;
  double tail_slope_ = 0.0;
};

/// Surviving paths report tau = t_max and their final position as pre and post.
/// Diffusive exits report the last simulated point for both.
struct ExitRecord {
  bool exited = false;
  bool by_jump = false;
  double tau = 0.0;
  Point pre;
  Point post;
};

/// One path from x until exit or t_max.
ExitRecord simulate_until_exit(const ProcessModel& model, const Domain& domain, std::span<const double> x,
                               double t_max, const SimConfig& cfg, std::uint64_t path_index = 0);

/// Shared engine; reuse across calls with the same model and config.
class Simulator {
 public:
  Simulator(ProcessModel model, SimConfig cfg);

  const SimConfig& config() const { return cfg_; }
  const IncrementSampler& sampler() const { return *sampler_; }
  const ProcessModel& model() const { return model_; }

  struct PathResult {
    ExitRecord exit;
    /// Positions at the requested record times; empty entries after exit.
    std::vector<Point> positions;
  };
  /// Optional integrand g(X_s) over [0, tau ^ t_max], added per path.
  using OccupationFn = std::function<void(std::span<const double> x, double dt, std::span<double> acc)>;

  PathResult run_path(const Domain& domain, std::span<const double> x, double t_max,
                      std::span<const double> record_times, std::uint64_t path_index,
                      const OccupationFn& occupation = {}, std::span<double> acc = {}) const;

  /// All paths, results in path order; deterministic for any thread count.
  std::vector<PathResult> run(const Domain& domain, std::span<const double> x, double t_max,
                              std::span<const double> record_times) const;

  std::vector<EmpiricalStats> survival(const Domain& domain, std::span<const double> x,
                                       std::span<const double> times) const;

 private:
  ProcessModel model_;
  SimConfig cfg_;
  std::shared_ptr<const IncrementSampler> sampler_;
};

std::vector<EmpiricalStats> empirical_survival(const ProcessModel& model, const Domain& domain,
                                               std::span<const double> x, std::span<const double> times,
                                               const SimConfig& cfg);

/// Partition for kernel histograms: shells |y - center| in [edges_i, edges_{i+1})
/// or boxes with the same edges on every axis.
struct BinSpec {
  enum class Kind { Radial, Box } kind = Kind::Box;
  Point center;
  std::vector<double> edges;

  std::size_t size(int d) const;
  /// Bin index of y or -1.
  long locate(std::span<const double> y) const;
  double volume(std::size_t bin, int d) const;
  /// Representative point (box centre, or radius midpoint along the first axis).
  Point midpoint(std::size_t bin, int d) const;
};

struct KernelHistogram {
  BinSpec bins;
  double t = 0.0;
  std::vector<EmpiricalStats> density;
  std::vector<std::uint64_t> counts;
  EmpiricalStats survival;
  /// Sum of density times bin volume.
  double mass() const;
};

KernelHistogram empirical_kernel(const ProcessModel& model, const Domain& domain, double t,
                                 std::span<const double> x, const BinSpec& bins, const SimConfig& cfg);
/// Both histograms from one set of paths, so the shared draws couple them.
KernelHistogram histogram_from_paths(const std::vector<Simulator::PathResult>& paths, std::size_t record,
                                     double t, const BinSpec& bins, int d, std::uint64_t seed);

struct ExitStats {
  EmpiricalStats exited;
  EmpiricalStats mean_tau;
  EmpiricalStats overshoot;
  std::uint64_t censored = 0;
};

/// P^x(|X_tau - c| >= r) for the ball-type domain with centre c, with E^x tau from the same paths.
ExitStats empirical_overshoot(const ProcessModel& model, const Domain& ball, std::span<const double> x, double r,
                              const SimConfig& cfg, double t_max = 1e3);

struct IkedaWatanabeBin {
  double a = 0.0;
  double b = 0.0;
  EmpiricalStats observed;
  EmpiricalStats predicted;
};

/// Jump exits from an interval into exterior bins [a, b) against the occupation
/// measure convolved with the simulated big-jump density.
std::vector<IkedaWatanabeBin> ikeda_watanabe_check(const ProcessModel& model, const Domain& interval, double x,
                                                   std::span<const std::pair<double, double>> bins,
                                                   const SimConfig& cfg, double t_max = 1e3);

/// Plain CSV of per-path exit records with a commented config echo.
void write_exit_csv(std::ostream& out, const std::vector<Simulator::PathResult>& paths, const SimConfig& cfg,
                    const std::string& model, const std::string& domain);

}  // namespace heatlab
