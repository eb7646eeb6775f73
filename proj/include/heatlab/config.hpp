#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "heatlab/geometry.hpp"
#include "heatlab/process_models.hpp"
#include "heatlab/renewal.hpp"
#include "heatlab/simulator.hpp"

namespace heatlab {

struct DomainSpec {
  DomainKind kind = DomainKind::WholeSpace;
  Point center;
  Point center2;
  double radius = 1.0;
  double level = 0.0;
  double high = 0.0;
  double low = 0.0;
  double width = 1.0;
  double lo = -1.0;
  double hi = 1.0;

  Domain build(int dimension) const;
};

struct RenewalSpec {
  RenewalBackend backend = RenewalBackend::HProxy;
  RenewalGrid grid;
  InversionOptions inversion;
  /// "none" or "unit-at-one" (rescale so that V(1) = 1).
  std::string normalize = "none";
};

struct ProfileSpec {
  /// "unit", "calibrated" or "file".
  std::string mode = "unit";
  std::filesystem::path file;
};

/// One entry of the `checks` list: a name plus numeric options.
struct CheckSpec {
  std::string name;
  std::optional<double> ceiling;
  std::map<std::string, double> scalars;
  std::map<std::string, std::vector<double>> lists;
  int line = 0;

  double scalar(const std::string& key, double fallback) const;
  std::vector<double> list(const std::string& key, std::vector<double> fallback) const;
};

struct CampaignConfig {
  ModelParams model;
  double theta = 0.0;
  std::optional<DomainSpec> domain;
  RenewalSpec renewal;
  SimConfig simulation;
  ProfileSpec profile;
  std::vector<CheckSpec> checks;
  std::filesystem::path output_dir;

  std::filesystem::path source;
  std::string text;
  /// FNV-1a of the config text.
  std::uint64_t hash = 0;
};

/// Names accepted in `checks`, with their option keys.
const std::map<std::string, std::vector<std::string>>& known_checks();

/// Throws ConfigError with the offending key and 1-based line.
CampaignConfig parse_config(const std::string& text, const std::filesystem::path& source = "<string>");
CampaignConfig load_config(const std::filesystem::path& path);

ProcessModel build_model(const CampaignConfig& cfg);
RenewalTable build_table(const CampaignConfig& cfg, const ProcessModel& model);

std::uint64_t fnv1a(const std::string& text);

}  // namespace heatlab
