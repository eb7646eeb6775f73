#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "heatlab/process_models.hpp"
#include "heatlab/renewal.hpp"

namespace heatlab {

enum class KernelRegime { Near, Far };
std::string to_string(KernelRegime regime);

struct KernelOptions {
  double rel_tol = 1e-6;
  /// Frequencies with t psi(s) above this are dropped (e^-45 ~ 3e-20).
  double cutoff = 45.0;
  int max_intervals = 20000;
};

struct KernelValue {
  double value = 0.0;
  double abs_error = 0.0;
  int intervals = 0;
  bool converged = true;
};

/// True when psi(u)/log u grows over u in [1e6, 1e12].
bool hartman_wintner_holds(const ProcessModel& model);
/// Throws UnsupportedRegime when the density may be unbounded.
void require_hartman_wintner(const ProcessModel& model);

/// Radial Fourier inversion of exp(-t psi) at radius r, with error estimate.
KernelValue p_free_detailed(const ProcessModel& model, double t, double r, const KernelOptions& options = {});
/// As p_free_detailed, throwing AccuracyWarning when the achieved relative
/// error exceeds 100 times the target.
double p_free(const ProcessModel& model, double t, double r, const KernelOptions& options = {});
/// Density at the origin.
double p0(const ProcessModel& model, double t, const KernelOptions& options = {});

/// Multiplicative constants for the two-sided envelope.
struct EnvelopeConstants {
  double lower = 1.0;
  double upper = 1.0;
  std::string profile = "unit";
};

struct KernelEnvelope {
  double lower = 0.0;
  double upper = 0.0;
  KernelRegime regime = KernelRegime::Near;
  /// [V^{-1}(sqrt t)]^{-d}
  double near_branch = 0.0;
  /// t / (V^2(r) r^d); +inf at r = 0
  double far_branch = 0.0;
  std::string profile;
};

/// min{[V^{-1}(sqrt t)]^{-d}, t/(V^2(r) r^d)} scaled by the profile constants.
/// With theta > 0 the bound is only claimed for t < V^2(1/theta) and r < 1/theta.
KernelEnvelope p_free_envelope(const ProcessModel& model, const RenewalTable& table, double t, double r,
                               const EnvelopeConstants& constants = {}, double theta = 0.0);

struct GRGrid {
  std::size_t radii = 12;
  std::size_t times = 12;
  /// Times sampled in [t_ratio_min V^2(r), V^2(r)].
  double t_ratio_min = 1e-4;
  /// Radii sampled in [R * r_ratio_min, R].
  double r_ratio_min = 1e-2;
  /// A grid constant above this is reported as failure.
  double ceiling = 1e4;
};

struct GRResult {
  bool holds = false;
  /// Smallest constant certified on the grid (inf when failing).
  double constant = 0.0;
  /// Point attaining the constant, or the first violation.
  double t = 0.0;
  double r = 0.0;
};

/// Grid check of t/(V^2(|x|)|x|^d) <= C p_t(x) for 0 < t <= V^2(|x|), |x| <= R.
GRResult check_GR(const ProcessModel& model, const RenewalTable& table, double R, const GRGrid& grid = {});

/// sup of p_t(r) r^d V^2(r) / t over the given grid.
double measure_upper_constant(const ProcessModel& model, const RenewalTable& table, std::span<const double> times,
                              std::span<const double> radii);

/// Largest c among `candidates` with p_t(y) >= 4^{-d-1} t nu(y) for all sampled
/// y and 0 < t < c / psi(1/y); returns 0 when none qualifies.
double measure_small_time_constant(const ProcessModel& model, std::span<const double> radii,
                                   std::span<const double> candidates, std::size_t times = 8);

/// CSV slice with columns t,r,p,lower,upper,regime.
void write_kernel_slice(std::ostream& out, const ProcessModel& model, const RenewalTable& table, double t,
                        std::span<const double> radii, const EnvelopeConstants& constants = {});

}  // namespace heatlab
