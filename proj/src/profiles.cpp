#include "heatlab/profiles.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>

#include <yaml-cpp/yaml.h>

#include "heatlab/errors.hpp"

namespace heatlab {

namespace {

struct Field {
  const char* key;
  double ConstantProfile::*member;
  bool upper;
};

constexpr Field kFields[] = {
    {"kernel_lower", &ConstantProfile::kernel_lower, false},
    {"kernel_upper", &ConstantProfile::kernel_upper, true},
    {"survival_lower", &ConstantProfile::survival_lower, false},
    {"survival_upper", &ConstantProfile::survival_upper, true},
    {"factorization_lower", &ConstantProfile::factorization_lower, false},
    {"factorization_upper", &ConstantProfile::factorization_upper, true},
    {"exit_c1", &ConstantProfile::exit_c1, true},
    {"eigen_c", &ConstantProfile::eigen_c, true},
};

std::string hex64(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

}  // namespace

void ConstantProfile::validate() const {
  for (const auto& f : kFields) {
    const double v = this->*f.member;
    if (!(v > 0.0) || !std::isfinite(v) || (f.upper ? v < 1.0 : v > 1.0)) {
      throw ConfigError(std::string("profile constant ") + f.key + (f.upper ? " must be >= 1" : " must lie in (0, 1]"),
                        f.key, 0);
    }
  }
}

ConstantProfile unit_profile() { return {}; }

ConstantProfile load_profile(const std::filesystem::path& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::Exception& e) {
    throw ConfigError("cannot read profile " + path.string() + ": " + e.what(), "profile", e.mark.line + 1);
  }
  ConstantProfile p;
  p.name = root["name"].as<std::string>("calibrated");
  p.provenance = root["provenance"].as<std::string>("");
  if (auto fp = root["fingerprint"]) p.model_fingerprint = std::stoull(fp.as<std::string>(), nullptr, 16);
  p.backend = root["backend"].as<std::string>("");
  const auto c = root["constants"];
  if (!c || !c.IsMap()) throw ConfigError("profile " + path.string() + " has no constants map", "constants", 0);
  for (const auto& f : kFields) {
    if (auto v = c[f.key]) {
      try {
        p.*f.member = v.as<double>();
      } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("profile constant ") + f.key + " is not a number", f.key, e.mark.line + 1);
      }
    }
  }
  p.validate();
  return p;
}

void save_profile(const ConstantProfile& profile, const std::filesystem::path& path) {
  profile.validate();
  YAML::Emitter out;
  out.SetDoublePrecision(10);
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << profile.name;
  out << YAML::Key << "provenance" << YAML::Value << profile.provenance;
  out << YAML::Key << "fingerprint" << YAML::Value << hex64(profile.model_fingerprint);
  out << YAML::Key << "backend" << YAML::Value << profile.backend;
  out << YAML::Key << "constants" << YAML::Value << YAML::BeginMap;
  for (const auto& f : kFields) out << YAML::Key << f.key << YAML::Value << profile.*f.member;
  out << YAML::EndMap << YAML::EndMap;
  std::ofstream file(path);
  if (!file) throw ConfigError("cannot write profile " + path.string(), "profile", 0);
  file << out.c_str() << "\n";
}

std::filesystem::path default_profile_dir() {
  if (const char* env = std::getenv("HEATLAB_PROFILE_DIR")) return env;
  return std::filesystem::path(HEATLAB_DATA_DIR) / "profiles";
}

std::optional<ConstantProfile> find_calibrated_profile(const ProcessModel& model, RenewalBackend backend,
                                                       const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) return std::nullopt;
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    if (entry.path().extension() == ".yaml") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    auto p = load_profile(f);
    if (p.model_fingerprint == model.fingerprint() && p.backend == to_string(backend)) return p;
  }
  return std::nullopt;
}

}  // namespace heatlab
