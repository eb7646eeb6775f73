#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace heatlab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (e.g. s <= 0).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Query outside the tabulated or extrapolable range.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Model fails a structural requirement (integrability, Hartman-Wintner, ...).
class ModelInvalid : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& what, std::vector<double> partial_sums)
      : Error(what), partial_sums_(std::move(partial_sums)) {}
  const std::vector<double>& partial_sums() const noexcept { return partial_sums_; }

 private:
  std::vector<double> partial_sums_;
};

/// No exponent in (0,2) fits the sampled scaling ratios.
class ScalingViolated : public Error {
 public:
  ScalingViolated(const std::string& what, double u, double lambda, double ratio)
      : Error(what), u_(u), lambda_(lambda), ratio_(ratio) {}
  double u() const noexcept { return u_; }
  double lambda() const noexcept { return lambda_; }
  double ratio() const noexcept { return ratio_; }

 private:
  double u_, lambda_, ratio_;
};

class InversionUnstable : public Error {
 public:
  InversionUnstable(const std::string& what, std::vector<double> radii)
      : Error(what), radii_(std::move(radii)) {}
  const std::vector<double>& radii() const noexcept { return radii_; }

 private:
  std::vector<double> radii_;
};

/// A bound was requested outside the hypotheses under which it holds.
class UnsupportedRegime : public Error {
 public:
  UnsupportedRegime(const std::string& what, std::string hypothesis)
      : Error(what), hypothesis_(std::move(hypothesis)) {}
  const std::string& hypothesis() const noexcept { return hypothesis_; }

 private:
  std::string hypothesis_;
};

class ConditionHUndecidable : public Error {
 public:
  using Error::Error;
};

/// Fourier inversion did not reach the requested accuracy.
class AccuracyWarning : public Error {
 public:
  AccuracyWarning(const std::string& what, double achieved)
      : Error(what), achieved_(achieved) {}
  double achieved_error() const noexcept { return achieved_; }

 private:
  double achieved_;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, std::string key, int line)
      : Error(what), key_(std::move(key)), line_(line) {}
  const std::string& key() const noexcept { return key_; }
  int line() const noexcept { return line_; }

 private:
  std::string key_;
  int line_;
};

}  // namespace heatlab
