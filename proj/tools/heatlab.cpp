#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "heatlab/campaign.hpp"
#include "heatlab/config.hpp"
#include "heatlab/dirichlet_bounds.hpp"
#include "heatlab/errors.hpp"
#include "heatlab/free_kernel.hpp"
#include "heatlab/profiles.hpp"
#include "heatlab/simulator.hpp"

namespace fs = std::filesystem;
using namespace heatlab;

namespace {

constexpr int kFailedRows = 1;
constexpr int kUsage = 2;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

int run(const fs::path& config, const std::string& out_dir, int threads, bool quiet) {
  auto cfg = load_config(config);
  if (threads >= 0) cfg.simulation.threads = static_cast<unsigned>(threads);
  const fs::path dir = out_dir.empty() ? cfg.output_dir : fs::path(out_dir);
  const auto result = run_campaign(cfg);
  write_campaign(result, cfg, dir);
  if (!quiet) {
    std::ifstream summary(dir / "summary.txt");
    std::cout << summary.rdbuf();
  }
  std::cerr << "report written to " << (dir / "report.csv").string() << "\n";
  return result.report.passed() ? 0 : kFailedRows;
}

int plot(const fs::path& report, const std::string& check, const std::string& out) {
  if (out.empty()) {
    emit_plotdata(report, check, std::cout);
  } else {
    std::ofstream file(out);
    if (!file) throw Error("cannot write " + out);
    emit_plotdata(report, check, file);
  }
  return 0;
}

int inspect(const fs::path& config) {
  const auto cfg = load_config(config);
  const auto model = build_model(cfg);
  std::cout << "model        " << model.describe() << "\n";
  char hex[24];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(model.fingerprint()));
  std::cout << "fingerprint  " << hex << "\n";
  std::cout << "support      " << fmt(model.support_radius()) << "\n";
  std::cout << "psi(1)       " << fmt(model.psi(1.0)) << "\n";
  std::cout << "h(1)         " << fmt(model.pruitt_h(1.0)) << "\n";
  const auto sc = assess_scaling(model);
  std::cout << "scaling      " << (sc.global ? "global" : sc.local ? "local (theta = 1)" : "none certified");
  if (sc.local) std::cout << ", alpha in [" << fmt(sc.alpha_low) << ", " << fmt(sc.alpha_up) << "]";
  std::cout << "\n";
  std::cout << "bounded p_t  " << (hartman_wintner_holds(model) ? "yes" : "not certified") << "\n";
  const auto& sim = cfg.simulation;
  const IncrementSampler sampler(model, sim);
  std::cout << "jump rate    L(" << fmt(sim.epsilon) << ") = " << fmt(sampler.jump_rate()) << ", small-jump variance "
            << fmt(sampler.gaussian_variance()) << " (" << to_string(sim.small_jump_mode) << ")\n";
  for (const auto& w : sampler.warnings(sim.dt)) std::cout << "warning      " << w << "\n";
  const auto table = build_table(cfg, model);
  std::cout << "renewal      " << to_string(table.backend()) << " (" << table.rule() << "), V(1) = " << fmt(table.V(1.0))
            << "\n";
  if (cfg.domain) {
    const auto D = cfg.domain->build(model.dimension());
    const auto c = D.c11_scales();
    std::cout << "domain       " << D.describe() << "\n";
    std::cout << "C11 scale    " << fmt(c.scale());
    if (c.has_exterior_pair) std::cout << ", exterior pair R1 = " << fmt(c.R1) << ", R2 = " << fmt(c.R2);
    std::cout << "\n";
    if (D.bounded()) std::cout << "inradius     " << fmt(D.inradius()) << ", diameter " << fmt(D.diameter()) << "\n";
  }
  try {
    const auto profile = resolve_profile(cfg, model);
    std::cout << "profile      " << profile.name << ": " << profile.provenance << "\n";
  } catch (const ConfigError& e) {
    std::cout << "profile      unresolved: " << e.what() << "\n";
  }
  std::cout << "checks       " << cfg.checks.size() << "\n";
  for (const auto& c : cfg.checks) std::cout << "  " << c.name << "\n";
  return 0;
}

int vtable(const fs::path& config, const std::string& out) {
  const auto cfg = load_config(config);
  const auto table = build_table(cfg, build_model(cfg));
  if (out.empty()) {
    table.write_csv(std::cout);
  } else {
    std::ofstream file(out);
    if (!file) throw Error("cannot write " + out);
    table.write_csv(file);
  }
  return 0;
}

std::string profile_slug(const CampaignConfig& cfg) {
  const auto& p = cfg.model;
  std::string s = to_string(p.kind) + "-d" + std::to_string(p.dimension) + "-a" + fmt(p.alpha);
  if (p.kind == PresetKind::SumOfStables || p.kind == PresetKind::ProfileNu) s += "-a" + fmt(p.alpha2);
  if (p.kind == PresetKind::TruncatedStable) s += "-b" + fmt(p.beta);
  return s + "-" + to_string(cfg.renewal.backend) + ".yaml";
}

int calibrate(const fs::path& config, const std::string& out) {
  const auto cfg = load_config(config);
  const auto profile = calibrate_profile(cfg);
  const fs::path path = out.empty() ? default_profile_dir() / profile_slug(cfg) : fs::path(out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  save_profile(profile, path);
  std::cout << "profile written to " << path.string() << "\n" << profile.provenance << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Validation campaigns for Dirichlet heat kernel estimates of isotropic Levy processes"};
  app.require_subcommand(1);

  fs::path config, report;
  std::string out, check;
  int threads = -1;
  bool quiet = false;

  auto* run_cmd = app.add_subcommand("run", "Run the checks listed in a campaign config");
  run_cmd->add_option("config", config, "Campaign config (YAML)")->required();
  run_cmd->add_option("-o,--out", out, "Output directory (default: output.dir from the config)");
  run_cmd->add_option("-j,--threads", threads, "Worker threads (0 = hardware); results do not depend on it");
  run_cmd->add_flag("-q,--quiet", quiet, "Do not print the summary");

  auto* plot_cmd = app.add_subcommand("plot", "Emit gnuplot data for one check of a report");
  plot_cmd->add_option("report", report, "report.csv written by `heatlab run`")->required();
  plot_cmd->add_option("check", check, "Check name")->required();
  plot_cmd->add_option("-o,--out", out, "Write to a file instead of stdout");

  auto* model_cmd = app.add_subcommand("model", "Model utilities");
  model_cmd->require_subcommand(1);
  auto* inspect_cmd = model_cmd->add_subcommand("inspect", "Describe the model, domain and profile of a config");
  inspect_cmd->add_option("config", config, "Campaign config (YAML)")->required();

  auto* vtable_cmd = app.add_subcommand("vtable", "Export the renewal function table as CSV");
  vtable_cmd->add_option("config", config, "Campaign config (YAML)")->required();
  vtable_cmd->add_option("-o,--out", out, "Write to a file instead of stdout");

  auto* cal_cmd = app.add_subcommand("calibrate", "Measure a calibrated constant profile for the config's model");
  cal_cmd->add_option("config", config, "Campaign config (YAML); simulation settings control the path count")->required();
  cal_cmd->add_option("-o,--out", out, "Profile path (default: the shipped profile directory)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run_cmd) return run(config, out, threads, quiet);
    if (*plot_cmd) return plot(report, check, out);
    if (*inspect_cmd) return inspect(config);
    if (*vtable_cmd) return vtable(config, out);
    if (*cal_cmd) return calibrate(config, out);
  } catch (const ConfigError& e) {
    std::cerr << "heatlab: " << config.string();
    if (e.line() > 0) std::cerr << ":" << e.line();
    std::cerr << ": " << e.key() << ": " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "heatlab: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
