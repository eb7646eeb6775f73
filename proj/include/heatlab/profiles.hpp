#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "heatlab/free_kernel.hpp"
#include "heatlab/process_models.hpp"
#include "heatlab/renewal.hpp"

namespace heatlab {

/// Multiplicative constants that turn structural factors into two-sided bounds.
/// Lower constants are at most 1 and upper constants at least 1.
struct ConstantProfile {
  std::string name = "unit";
  std::string provenance = "all constants 1";
  /// Fingerprint and backend of the model/table the constants were measured for (0 / empty: any).
  std::uint64_t model_fingerprint = 0;
  std::string backend;

  double kernel_lower = 1.0;
  double kernel_upper = 1.0;
  double survival_lower = 1.0;
  double survival_upper = 1.0;
  double factorization_lower = 1.0;
  double factorization_upper = 1.0;
  /// E^x tau >= V^2(r)/exit_c1 on the half ball; also the overshoot constant.
  double exit_c1 = 1.0;
  /// lambda_high = eigen_c (diam/r)^{d/2} / V^2(r)
  double eigen_c = 1.0;

  EnvelopeConstants kernel() const { return {kernel_lower, kernel_upper, name}; }
  /// Throws ConfigError when a constant is on the wrong side of 1.
  void validate() const;
};

ConstantProfile unit_profile();

ConstantProfile load_profile(const std::filesystem::path& path);
void save_profile(const ConstantProfile& profile, const std::filesystem::path& path);

/// Directory holding the shipped calibrated profiles.
std::filesystem::path default_profile_dir();
/// Calibrated profile for (model, backend) from `dir`, if one was shipped.
std::optional<ConstantProfile> find_calibrated_profile(const ProcessModel& model, RenewalBackend backend,
                                                       const std::filesystem::path& dir = default_profile_dir());

}  // namespace heatlab
