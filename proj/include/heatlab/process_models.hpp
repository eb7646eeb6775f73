#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace heatlab {

enum class PresetKind { Stable, TruncatedStable, SumOfStables, SubordinateBM, ProfileNu, Custom };

/// Shape of the jump-intensity profile f in nu(s) = f(s) / s^d.
enum class NuProfile { Piecewise, LogRatio, InverseLog };

std::string to_string(PresetKind kind);
PresetKind preset_from_string(const std::string& name);
std::string to_string(NuProfile profile);
NuProfile nu_profile_from_string(const std::string& name);

struct ModelParams {
  PresetKind kind = PresetKind::Stable;
  int dimension = 1;
  double alpha = 1.0;
  double alpha2 = 0.0;
  double beta = 0.0;
  /// Multiplier on psi (stable preset only).
  double scale = 1.0;
  NuProfile profile = NuProfile::Piecewise;
};

namespace detail {
class ModelImpl;
}

/// Isotropic unimodal pure-jump Levy process in dimension 1, 2 or 3, described
/// by its radial Levy density nu and radial characteristic exponent psi.
///
/// Instances are cheap to copy and immutable; derived quantities that need a
/// table (psi for density-defined presets) are built once on first use.
class ProcessModel {
 public:
  /// psi(u) = scale * u^alpha.
  static ProcessModel stable(int d, double alpha, double scale = 1.0);
  /// Stable process parametrized by its density nu(s) = coefficient * s^{-d-alpha}.
  static ProcessModel power_law_nu(int d, double alpha, double coefficient);
  /// nu(s) = log^beta(1 + 1/s) s^{-d-alpha} for s < 1, zero beyond.
  static ProcessModel truncated_stable(int d, double alpha, double beta);
  /// psi(u) = u^alpha1 + u^alpha2.
  static ProcessModel sum_of_stables(int d, double alpha1, double alpha2);
  /// Brownian motion time-changed by the subordinator with Levy density
  /// r^{-1-alpha/2} on (0,1).
  static ProcessModel subordinate_bm(int d, double alpha);
  static ProcessModel profile_nu(int d, NuProfile profile, double alpha1, double alpha2 = 0.0);
  /// User supplied nonincreasing radial density. `breakpoints` lists radii
  /// where nu is not smooth; `support` is the radius beyond which nu vanishes.
  static ProcessModel custom(int d, std::function<double(double)> nu,
                             std::vector<double> breakpoints = {},
                             double support = std::numeric_limits<double>::infinity(),
                             std::string label = "custom");
  static ProcessModel from_params(const ModelParams& params);

  int dimension() const;
  PresetKind kind() const;
  const ModelParams& params() const;
  std::string describe() const;
  /// FNV-1a hash of the canonical parameter string.
  std::uint64_t fingerprint() const;

  /// Accurate psi(u); quadrature for density-defined presets.
  double psi(double u) const;
  /// log psi(u) through closed forms or the cached interpolation table.
  double log_psi(double u) const;
  double psi_fast(double u) const;
  bool psi_closed_form() const;
  /// log psi on the complex plane, available only for power-law exponents.
  std::optional<std::complex<double>> log_psi_complex(std::complex<double> z) const;

  double nu(double s) const;
  /// L(r) = nu(B_r^c).
  double tail_mass(double r) const;
  double pruitt_h(double r) const;
  /// Integral of |z|^2 nu(dz) over B_r.
  double second_moment(double r) const;
  double support_radius() const;
  const std::vector<double>& breakpoints() const;

 private:
  explicit ProcessModel(std::shared_ptr<const detail::ModelImpl> impl);
  std::shared_ptr<const detail::ModelImpl> impl_;
};

double psi(const ProcessModel& model, double u);
double nu_radial(const ProcessModel& model, double s);
double pruitt_h(const ProcessModel& model, double r);
double tail_mass(const ProcessModel& model, double r);

/// Normalizing constant A with nu(s) = A s^{-d-alpha} for psi(u) = u^alpha.
double stable_nu_constant(int d, double alpha);

struct ScalingGrid {
  double u_min = 1e-6;
  double decades = 12.0;
  int points_per_decade = 10;
  double u_cap = 1e12;
};

struct ScalingPair {
  double u = 0.0;
  double lambda = 1.0;
  double ratio = 1.0;
};

/// Weak lower / upper scaling of psi certified on a finite geometric grid:
/// c_low lambda^alpha_low psi(u) <= psi(lambda u) <= C_up lambda^alpha_up psi(u).
struct ScalingCharacteristics {
  double alpha_low = 0.0;
  double c_low = 1.0;
  double theta_low = 0.0;
  double alpha_up = 0.0;
  double C_up = 1.0;
  double theta_up = 0.0;
  bool global_low = true;
  bool global_up = true;
  ScalingPair extremal_low;
  ScalingPair extremal_up;
  ScalingGrid grid;
  std::size_t pairs = 0;
};

ScalingCharacteristics verify_scaling(const ProcessModel& model, double theta,
                                      const ScalingGrid& grid = {});

}  // namespace heatlab
