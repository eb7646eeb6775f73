#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>

#include "heatlab/free_kernel.hpp"
#include "heatlab/geometry.hpp"
#include "heatlab/process_models.hpp"
#include "heatlab/profiles.hpp"
#include "heatlab/renewal.hpp"

namespace heatlab {

enum class SurvivalRegime { SmallTime, LargeTime, AllTime };
std::string to_string(SurvivalRegime regime);

struct SurvivalEnvelope {
  double structural = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  SurvivalRegime regime = SurvivalRegime::AllTime;
  DomainKind kind = DomainKind::WholeSpace;
};

struct KernelFactorization {
  double structural = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  SurvivalRegime regime = SurvivalRegime::AllTime;
};

struct EigenBracket {
  double lambda_low = 0.0;
  double lambda_high = 0.0;
  double inradius = 0.0;
  double diameter = 0.0;
};

struct ExitTimeBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// What the scaling verifier certifies for a model.
struct ScalingStatus {
  bool local = false;
  bool global = false;
  double alpha_low = 0.0;
  double alpha_up = 0.0;
};

/// Global scaling needs both exponents away from 0 and 2 over the whole grid;
/// local scaling is checked above u = 1.
ScalingStatus assess_scaling(const ProcessModel& model);

/// V(delta) / (sqrt(t) ^ V(s)) ^ 1; s = +inf gives V(delta)/sqrt(t) ^ 1.
double survival_factor(const RenewalTable& table, double delta, double t, double s);

/// Two-sided survival and killed-kernel envelopes for one (model, table, domain, profile).
class DirichletBounds {
 public:
  /// Throws UnsupportedRegime when the domain/scaling pair has no estimate.
  DirichletBounds(ProcessModel model, RenewalTable table, Domain domain, ConstantProfile profile = unit_profile());

  SurvivalEnvelope survival(double t, std::span<const double> x) const;
  KernelFactorization kernel(double t, std::span<const double> x, std::span<const double> y) const;
  EigenBracket eigen_bracket() const;
  ExitTimeBounds exit_time(std::span<const double> x) const;

  /// Replaces the bracket midpoint used in structural factors (e.g. by a fitted decay rate).
  void set_decay_rate(double lambda) { decay_override_ = lambda; }
  double decay_rate() const;

  /// Time below which the small-time form applies: V^2(C^{1,1} scale).
  double t0() const { return t0_; }
  double scale() const { return scale_; }
  const ScalingStatus& scaling() const { return scaling_; }
  const Domain& domain() const { return domain_; }
  const RenewalTable& table() const { return table_; }
  const ProcessModel& model() const { return model_; }
  const ConstantProfile& profile() const { return profile_; }

  /// CSV rows t,x...,y...,F,lower,upper,regime.
  void write_csv(std::ostream& out, std::span<const double> times, std::span<const Point> xs,
                 std::span<const Point> ys) const;

 private:
  double free_density(double t, double r) const;

  ProcessModel model_;
  RenewalTable table_;
  Domain domain_;
  ConstantProfile profile_;
  ScalingStatus scaling_;
  double scale_ = 0.0;
  double t0_ = 0.0;
  std::optional<EigenBracket> eigen_;
  std::optional<double> decay_override_;
};

/// Terms of (1/(l+2)) (V(r)/sqrt(t0) ^ 1)(V(r + l r0)/sqrt(t) ^ 1) <= V(r)/sqrt(t) ^ 1 <= (...)(...),
/// r0 = V^{-1}(sqrt t0), for l >= 1 and t > t0.
struct VProduct {
  double left = 0.0;
  double middle = 0.0;
  double right = 0.0;
};
VProduct v_product(const RenewalTable& table, double t0, double r, double lambda, double t);

}  // namespace heatlab
