#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "heatlab/process_models.hpp"

namespace heatlab {

enum class RenewalBackend { ExactLaplace, HProxy };

std::string to_string(RenewalBackend backend);
RenewalBackend renewal_backend_from_string(const std::string& name);

struct RenewalGrid {
  double log10_min = -4.0;
  double log10_max = 4.0;
  int points_per_decade = 16;
};

struct InversionOptions {
  int stehfest_order = 12;
  /// Retry with the fixed Talbot contour when the real-axis rule oscillates.
  bool contour_fallback = true;
  int talbot_nodes = 32;
  /// Force the contour rule (testing and presets with known instability).
  bool force_contour = false;
};

/// Renewal function V of the ladder-height process on a log grid, with its
/// derivative and inverse. Interpolation is monotone cubic in log-log
/// coordinates, with power-law extrapolation up to one decade past the grid.
class RenewalTable {
 public:
  RenewalTable(RenewalBackend backend, std::uint64_t fingerprint, std::vector<double> radii,
               std::vector<double> values, std::vector<double> derivatives, double normalization = 1.0,
               std::string rule = {});

  double V(double r) const;
  double Vprime(double r) const;
  /// Solves V(r) = s by bisection, relative accuracy 1e-12 in r.
  double Vinverse(double s) const;

  const std::vector<double>& radii() const { return r_; }
  const std::vector<double>& values() const { return v_; }
  const std::vector<double>& derivatives() const { return dv_; }
  RenewalBackend backend() const { return backend_; }
  std::uint64_t model_fingerprint() const { return fingerprint_; }
  double normalization() const { return normalization_; }
  const std::string& rule() const { return rule_; }
  /// Smallest and largest radii accepted by queries.
  double r_min() const { return r_.front() / 10.0; }
  double r_max() const { return r_.back() * 10.0; }

  /// Same table with V and V' multiplied by `factor`.
  RenewalTable rescaled(double factor) const;

  void write_csv(std::ostream& out) const;
  static RenewalTable read_csv(std::istream& in);

 private:
  struct Interp;
  double log_v(double lr) const;
  double log_v_slope(double lr) const;

  RenewalBackend backend_;
  std::uint64_t fingerprint_;
  std::vector<double> r_, v_, dv_;
  double normalization_;
  std::string rule_;
  std::shared_ptr<const Interp> interp_;
};

/// Laplace exponent of the ladder-height process,
/// exp{(1/pi) int_0^inf log psi(xi z) / (1 + z^2) dz}.
double kappa(const ProcessModel& model, double xi);
/// Analytic continuation of kappa; requires a complex log psi.
std::complex<double> kappa_complex(const ProcessModel& model, std::complex<double> s);

/// Real-axis Gaver-Stehfest inversion of order n (even), summed in quad precision.
double invert_laplace_stehfest(const std::function<double(double)>& transform, double t, int n);
/// Fixed Talbot contour inversion with m nodes.
double invert_laplace_talbot(const std::function<std::complex<double>(std::complex<double>)>& transform,
                             double t, int m);

RenewalTable build_renewal_table(const ProcessModel& model, RenewalBackend backend,
                                 const RenewalGrid& grid = {}, const InversionOptions& options = {});

enum class RenewalQuery { V, Vprime, Vinverse };
double renewal_eval(const RenewalTable& table, RenewalQuery query, double x);

struct HEstimate {
  double H = 1.0;
  double x = 0.0, y = 0.0, z = 0.0;
  std::size_t points = 0;
};

/// Grid-certified sup over 0 < x <= y <= z <= 5x <= 5r of
/// (V(z) - V(y)) / (V'(x)(z - y)).
HEstimate estimate_H(const RenewalTable& table, double r, std::size_t points = 200);

struct Band {
  double lower = 0.0;
  double upper = 0.0;
  /// max(upper, 1/lower)
  double K() const;
};

/// Extremes of V_a / V_b over the radii of `a` covered by both tables.
Band compare_tables(const RenewalTable& a, const RenewalTable& b);
/// Extremes of h(r) V(r)^2 over the table grid.
Band h_v2_band(const ProcessModel& model, const RenewalTable& table);
/// Smallest A with V(eta w) <= A eta^{alpha_low/2} V(w) over grid pairs, 0 < eta <= 1.
double scaling_transfer_constant(const RenewalTable& table, double alpha_low);

}  // namespace heatlab
