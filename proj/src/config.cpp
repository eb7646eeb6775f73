#include "heatlab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>
#include <yaml-cpp/yaml.h>

#include "heatlab/errors.hpp"

namespace heatlab {

namespace {

int line_of(const YAML::Node& n) { return n.Mark().line + 1; }

void reject_unknown(const YAML::Node& map, const std::string& section, std::initializer_list<const char*> allowed) {
  if (!map.IsMap()) throw ConfigError("section '" + section + "' must be a mapping", section, line_of(map));
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      std::string list;
      for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
      throw ConfigError("unknown key '" + key + "' in " + section + " (allowed: " + list + ")", section + "." + key,
                        line_of(kv.first));
    }
  }
}

template <class T>
T get(const YAML::Node& map, const char* key, const std::string& section, T fallback) {
  const auto n = map[key];
  if (!n) return fallback;
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("key '" + section + "." + key + "' has the wrong type", section + "." + key, line_of(n));
  }
}

std::vector<double> get_list(const YAML::Node& map, const char* key, const std::string& section,
                             std::vector<double> fallback) {
  const auto n = map[key];
  if (!n) return fallback;
  if (!n.IsSequence()) throw ConfigError("key '" + section + "." + key + "' must be a list", section + "." + key, line_of(n));
  return get<std::vector<double>>(map, key, section, {});
}

template <class Fn>
auto convert(const YAML::Node& n, const std::string& key, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw ConfigError(e.what(), key, line_of(n));
  }
}

void parse_model(const YAML::Node& m, CampaignConfig& cfg) {
  reject_unknown(m, "model", {"kind", "dimension", "alpha", "alpha2", "beta", "theta", "profile"});
  if (!m["kind"]) throw ConfigError("model.kind is required", "model.kind", line_of(m));
  auto& p = cfg.model;
  const auto kind = get<std::string>(m, "kind", "model", "");
  p.kind = convert(m["kind"], "model.kind", [&] { return preset_from_string(kind); });
  if (p.kind == PresetKind::Custom) {
    throw ConfigError("custom models cannot be declared in a config file", "model.kind", line_of(m["kind"]));
  }
  p.dimension = get<int>(m, "dimension", "model", 1);
  p.alpha = get<double>(m, "alpha", "model", 1.0);
  p.alpha2 = get<double>(m, "alpha2", "model", 0.0);
  p.beta = get<double>(m, "beta", "model", 0.0);
  if (m["profile"]) {
    const auto name = get<std::string>(m, "profile", "model", "");
    p.profile = convert(m["profile"], "model.profile", [&] { return nu_profile_from_string(name); });
  }
  cfg.theta = get<double>(m, "theta", "model", 0.0);
  if (cfg.theta < 0.0) throw ConfigError("model.theta must be nonnegative", "model.theta", line_of(m["theta"]));
  convert(m, "model", [&] { return ProcessModel::from_params(p); });
}

void parse_domain(const YAML::Node& n, CampaignConfig& cfg) {
  reject_unknown(n, "domain", {"kind", "center", "center2", "radius", "level", "high", "low", "width", "lo", "hi"});
  if (!n["kind"]) throw ConfigError("domain.kind is required", "domain.kind", line_of(n));
  DomainSpec s;
  const auto kind = get<std::string>(n, "kind", "domain", "");
  s.kind = convert(n["kind"], "domain.kind", [&] { return domain_kind_from_string(kind); });
  const int d = cfg.model.dimension;
  s.center = get_list(n, "center", "domain", Point(d, 0.0));
  s.center2 = get_list(n, "center2", "domain", {});
  s.radius = get<double>(n, "radius", "domain", 1.0);
  s.level = get<double>(n, "level", "domain", 0.0);
  s.high = get<double>(n, "high", "domain", 0.0);
  s.low = get<double>(n, "low", "domain", -0.5);
  s.width = get<double>(n, "width", "domain", 1.0);
  s.lo = get<double>(n, "lo", "domain", -1.0);
  s.hi = get<double>(n, "hi", "domain", 1.0);
  if (s.kind == DomainKind::UnionTwoBalls && !n["center2"]) {
    throw ConfigError("union-two-balls needs domain.center2", "domain.center2", line_of(n));
  }
  convert(n, "domain", [&] { return s.build(d); });
  cfg.domain = s;
}

void parse_renewal(const YAML::Node& n, CampaignConfig& cfg) {
  reject_unknown(n, "renewal",
                 {"backend", "log10_min", "log10_max", "points_per_decade", "stehfest_order", "talbot_nodes",
                  "contour_fallback", "force_contour", "normalize"});
  auto& r = cfg.renewal;
  if (n["backend"]) {
    const auto b = get<std::string>(n, "backend", "renewal", "");
    r.backend = convert(n["backend"], "renewal.backend", [&] { return renewal_backend_from_string(b); });
  }
  r.grid.log10_min = get<double>(n, "log10_min", "renewal", r.grid.log10_min);
  r.grid.log10_max = get<double>(n, "log10_max", "renewal", r.grid.log10_max);
  r.grid.points_per_decade = get<int>(n, "points_per_decade", "renewal", r.grid.points_per_decade);
  r.inversion.stehfest_order = get<int>(n, "stehfest_order", "renewal", r.inversion.stehfest_order);
  r.inversion.talbot_nodes = get<int>(n, "talbot_nodes", "renewal", r.inversion.talbot_nodes);
  r.inversion.contour_fallback = get<bool>(n, "contour_fallback", "renewal", r.inversion.contour_fallback);
  r.inversion.force_contour = get<bool>(n, "force_contour", "renewal", r.inversion.force_contour);
  r.normalize = get<std::string>(n, "normalize", "renewal", r.normalize);
  if (r.normalize != "none" && r.normalize != "unit-at-one") {
    throw ConfigError("renewal.normalize must be none or unit-at-one", "renewal.normalize", line_of(n["normalize"]));
  }
  if (!(r.grid.log10_max > r.grid.log10_min) || r.grid.points_per_decade < 2) {
    throw ConfigError("renewal grid needs log10_max > log10_min and at least 2 points per decade", "renewal",
                      line_of(n));
  }
}

void parse_simulation(const YAML::Node& n, CampaignConfig& cfg) {
  reject_unknown(n, "simulation",
                 {"epsilon", "dt", "dt_growth", "n_paths", "seed", "small_jump_mode", "exit_refinement", "threads"});
  auto& s = cfg.simulation;
  s.epsilon = get<double>(n, "epsilon", "simulation", s.epsilon);
  s.dt = get<double>(n, "dt", "simulation", s.dt);
  s.dt_growth = get<double>(n, "dt_growth", "simulation", s.dt_growth);
  s.n_paths = get<std::uint64_t>(n, "n_paths", "simulation", s.n_paths);
  s.seed = get<std::uint64_t>(n, "seed", "simulation", s.seed);
  s.exit_refinement = get<int>(n, "exit_refinement", "simulation", s.exit_refinement);
  s.threads = get<unsigned>(n, "threads", "simulation", s.threads);
  if (n["small_jump_mode"]) {
    const auto m = get<std::string>(n, "small_jump_mode", "simulation", "");
    s.small_jump_mode = convert(n["small_jump_mode"], "simulation.small_jump_mode",
                                [&] { return small_jump_mode_from_string(m); });
  }
  convert(n, "simulation", [&] {
    s.validate();
    return 0;
  });
}

void parse_profile(const YAML::Node& n, CampaignConfig& cfg) {
  if (n.IsScalar()) {
    const auto v = n.as<std::string>();
    if (v == "unit" || v == "calibrated") {
      cfg.profile.mode = v;
    } else {
      cfg.profile.mode = "file";
      cfg.profile.file = v;
    }
    return;
  }
  reject_unknown(n, "profile", {"mode", "file"});
  cfg.profile.mode = get<std::string>(n, "mode", "profile", "unit");
  cfg.profile.file = get<std::string>(n, "file", "profile", "");
  if (cfg.profile.mode != "unit" && cfg.profile.mode != "calibrated" && cfg.profile.mode != "file") {
    throw ConfigError("profile.mode must be unit, calibrated or file", "profile.mode", line_of(n["mode"]));
  }
  if (cfg.profile.mode == "file" && cfg.profile.file.empty()) {
    throw ConfigError("profile.file is required when mode is file", "profile.file", line_of(n));
  }
}

void parse_checks(const YAML::Node& n, CampaignConfig& cfg) {
  if (n.IsNull()) return;
  if (!n.IsSequence()) throw ConfigError("checks must be a list", "checks", line_of(n));
  const auto& known = known_checks();
  for (const auto& item : n) {
    CheckSpec c;
    c.line = line_of(item);
    YAML::Node opts;
    bool has_opts = false;
    if (item.IsScalar()) {
      c.name = item.as<std::string>();
    } else if (item.IsMap()) {
      if (!item["name"]) throw ConfigError("check entry needs a name", "checks.name", c.line);
      c.name = item["name"].as<std::string>();
      opts.reset(item);
      has_opts = true;
    } else {
      throw ConfigError("check entries are names or mappings", "checks", c.line);
    }
    auto it = known.find(c.name);
    if (it == known.end()) {
      std::string list;
      for (const auto& [k, v] : known) list += (list.empty() ? "" : ", ") + k;
      throw ConfigError("unknown check '" + c.name + "' (known: " + list + ")", "checks." + c.name, c.line);
    }
    if (has_opts) {
      for (const auto& kv : opts) {
        const auto key = kv.first.as<std::string>();
        if (key == "name") continue;
        const std::string full = "checks." + c.name + "." + key;
        if (key == "ceiling") {
          c.ceiling = get<double>(opts, "ceiling", "checks." + c.name, 0.0);
          continue;
        }
        if (std::find(it->second.begin(), it->second.end(), key) == it->second.end()) {
          std::string list = "ceiling";
          for (const auto& k : it->second) list += ", " + k;
          throw ConfigError("unknown option '" + key + "' for check " + c.name + " (allowed: " + list + ")", full,
                            line_of(kv.first));
        }
        try {
          if (kv.second.IsSequence()) {
            c.lists[key] = kv.second.as<std::vector<double>>();
          } else {
            c.scalars[key] = kv.second.as<double>();
          }
        } catch (const YAML::Exception&) {
          throw ConfigError("option '" + key + "' must be a number or a list of numbers", full, line_of(kv.second));
        }
      }
    }
    cfg.checks.push_back(std::move(c));
  }
}

}  // namespace

Domain DomainSpec::build(int d) const {
  switch (kind) {
    case DomainKind::Ball: return Domain::ball(d, center, radius);
    case DomainKind::ExteriorBall: return Domain::exterior_ball(d, center, radius);
    case DomainKind::Halfspace: return Domain::halfspace(d, level);
    case DomainKind::HalfspaceLikeSlabBump: return Domain::halfspace_bump(d, high, low, width);
    case DomainKind::UnionTwoBalls: return Domain::union_two_balls(d, center, center2, radius);
    case DomainKind::Interval:
      if (d != 1) throw DomainError("interval domains need dimension 1");
      return Domain::interval(lo, hi);
    case DomainKind::WholeSpace: return Domain::whole_space(d);
  }
  throw DomainError("unknown domain kind");
}

double CheckSpec::scalar(const std::string& key, double fallback) const {
  auto it = scalars.find(key);
  return it == scalars.end() ? fallback : it->second;
}

std::vector<double> CheckSpec::list(const std::string& key, std::vector<double> fallback) const {
  auto it = lists.find(key);
  if (it != lists.end()) return it->second;
  auto s = scalars.find(key);
  if (s != scalars.end()) return {s->second};
  return fallback;
}

const std::map<std::string, std::vector<std::string>>& known_checks() {
  static const std::map<std::string, std::vector<std::string>> table{
      {"free-kernel-oracle", {"t", "r_max", "points"}},
      {"renewal-exactness", {"r_min", "r_max", "points", "proxy_ceiling"}},
      {"free-kernel-envelope", {"times", "radii", "refine", "t_min", "t_max", "r_min", "r_max", "gr_radius"}},
      {"envelope-sandwich", {"times", "radii", "distances"}},
      {"survival-factorization", {"distances", "times", "paths"}},
      {"kernel-factorization", {"times", "x_distances", "y_distances", "separation", "bin_width", "paths"}},
      {"eigen-bracket", {"t_start", "t_end", "points", "paths", "min_survivors"}},
      {"exit-time", {"distances", "paths", "t_max"}},
      {"overshoot", {"radius", "radii", "paths", "t_max"}},
      {"ikeda-watanabe", {"x", "edges", "paths", "t_max"}},
      {"ub-product", {"t", "distance", "bins", "r_max", "paths"}},
      {"domain-monotonicity", {"t", "distance", "bins", "r_max", "paths"}},
      {"chapman-kolmogorov", {"t", "distance", "bins", "inner_bins", "extent", "paths"}},
      {"v-product", {"t0", "radii", "lambdas", "times"}},
  };
  return table;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

CampaignConfig parse_config(const std::string& text, const std::filesystem::path& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(source.string() + ": " + e.msg, "", e.mark.line + 1);
  }
  if (!root.IsMap()) throw ConfigError(source.string() + ": top level must be a mapping", "", 1);
  reject_unknown(root, "config", {"model", "domain", "renewal", "simulation", "profile", "checks", "output"});
  CampaignConfig cfg;
  cfg.source = source;
  cfg.text = text;
  cfg.hash = fnv1a(text);
  if (!root["model"]) throw ConfigError("section 'model' is required", "model", 1);
  parse_model(root["model"], cfg);
  if (root["domain"]) parse_domain(root["domain"], cfg);
  if (root["renewal"]) parse_renewal(root["renewal"], cfg);
  if (root["simulation"]) parse_simulation(root["simulation"], cfg);
  if (root["profile"]) parse_profile(root["profile"], cfg);
  if (root["checks"]) parse_checks(root["checks"], cfg);
  const auto base = source.has_parent_path() ? source.parent_path() : std::filesystem::path(".");
  std::filesystem::path out = source.stem().string() + "-out";
  if (const auto o = root["output"]) {
    reject_unknown(o, "output", {"dir"});
    out = get<std::string>(o, "dir", "output", out.string());
  }
  cfg.output_dir = out.is_absolute() ? out : base / out;
  if (cfg.profile.mode == "file" && cfg.profile.file.is_relative()) cfg.profile.file = base / cfg.profile.file;
  return cfg;
}

CampaignConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string(), "", 0);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

ProcessModel build_model(const CampaignConfig& cfg) { return ProcessModel::from_params(cfg.model); }

RenewalTable build_table(const CampaignConfig& cfg, const ProcessModel& model) {
  auto table = build_renewal_table(model, cfg.renewal.backend, cfg.renewal.grid, cfg.renewal.inversion);
  if (cfg.renewal.normalize == "unit-at-one") table = table.rescaled(1.0 / table.V(1.0));
  return table;
}

}  // namespace heatlab
