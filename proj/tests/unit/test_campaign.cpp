#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "heatlab/campaign.hpp"
#include "heatlab/config.hpp"
#include "heatlab/errors.hpp"
#include "heatlab/profiles.hpp"

using namespace heatlab;
namespace fs = std::filesystem;

namespace {

const char* kCauchy = R"(model:
  kind: stable
  dimension: 1
  alpha: 1.0
domain:
  kind: interval
  lo: -1
  hi: 1
simulation:
  n_paths: 400
  seed: 7
checks:
  - free-kernel-oracle
  - name: v-product
    ceiling: 1.000000001
)";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config errors carry the key and line") {
  const std::string bad = "model:\n  kind: stable\n  dimension: 1\n  alpah: 1.0\n";
  try {
    parse_config(bad, "bad.yaml");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.key() == "model.alpah");
    CHECK(e.line() == 4);
  }
  CHECK_THROWS_AS(parse_config("model:\n  kind: stable\n  dimension: 1\n  alpha: 1\nchecks: [no-such-check]\n", "x"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config("model:\n  dimension: 1\n", "x"), ConfigError);
}

TEST_CASE("a config without checks gives an empty passing report") {
  const auto cfg = parse_config("model:\n  kind: stable\n  dimension: 2\n  alpha: 1.5\n", "empty.yaml");
  const auto res = run_campaign(cfg);
  CHECK(res.report.rows.empty());
  CHECK(res.report.passed());
  CHECK(res.tables.empty());
}

TEST_CASE("Cauchy oracle and V-product checks pass") {
  const auto cfg = parse_config(kCauchy, "cauchy.yaml");
  const auto res = run_campaign(cfg);
  REQUIRE(res.report.rows.size() == 2);
  for (const auto& r : res.report.rows) {
    INFO(r.check << ": " << r.detail);
    CHECK(r.status == CheckStatus::Pass);
  }
  CHECK(res.report.rows[0].statistic < 1.0001);
}

TEST_CASE("non-Cauchy oracle is skipped with its hypothesis") {
  const auto cfg = parse_config(
      "model:\n  kind: stable\n  dimension: 1\n  alpha: 1.5\nchecks: [free-kernel-oracle]\n", "s.yaml");
  const auto res = run_campaign(cfg);
  REQUIRE(res.report.rows.size() == 1);
  CHECK(res.report.rows[0].status == CheckStatus::Skipped);
  CHECK(res.report.rows[0].detail.find("requires") != std::string::npos);
  CHECK(res.report.passed());
}

TEST_CASE("report round trip and plot data") {
  const auto cfg = parse_config(kCauchy, "cauchy.yaml");
  const auto res = run_campaign(cfg);
  const auto dir = fs::temp_directory_path() / "heatlab_campaign_test";
  fs::remove_all(dir);
  write_campaign(res, cfg, dir);
  std::ifstream in(dir / "report.csv");
  const auto back = ValidationReport::read_csv(in);
  CHECK(back == res.report);

  std::ostringstream plot;
  emit_plotdata(dir / "report.csv", "free-kernel-oracle", plot);
  const auto text = plot.str();
  CHECK(text.find("1:r [length]") != std::string::npos);
  CHECK(text.find("3:oracle") != std::string::npos);
  std::ostringstream blocks;
  emit_plotdata(dir / "report.csv", "v-product", blocks);
  CHECK(blocks.str().find("# t = ") != std::string::npos);
  std::ostringstream none;
  CHECK_THROWS_AS(emit_plotdata(dir / "report.csv", "overshoot", none), Error);

  // a rerun writes identical data files
  const auto again = dir / "again";
  write_campaign(run_campaign(cfg), cfg, again);
  CHECK(slurp(dir / "report.csv") == slurp(again / "report.csv"));
  CHECK(slurp(dir / "v-product.csv") == slurp(again / "v-product.csv"));
  fs::remove_all(dir);
}

TEST_CASE("quoted fields survive the CSV round trip") {
  ValidationReport rep;
  rep.model = "m";
  rep.domain = "d";
  rep.profile = "unit";
  rep.seed = 3;
  rep.config_hash = "00";
  ReportRow r;
  r.check = "c";
  r.case_name = "a, \"b\"";
  r.grid = "g";
  r.min_ratio = 0.1;
  r.max_ratio = std::numeric_limits<double>::infinity();
  r.statistic = std::nan("");
  r.ceiling = 1.0;
  r.status = CheckStatus::Fail;
  r.detail = "x,y";
  r.config_hash = "00";
  rep.rows.push_back(r);
  std::stringstream ss;
  rep.write_csv(ss);
  CHECK(ValidationReport::read_csv(ss) == rep);
}

TEST_CASE("survival factorization on the Cauchy interval") {
  auto cfg = parse_config(
      "model:\n  kind: stable\n  dimension: 1\n  alpha: 1.0\ndomain:\n  kind: interval\n  lo: -1\n  hi: 1\n"
      "simulation:\n  n_paths: 300\n  seed: 3\n"
      "checks:\n  - name: survival-factorization\n    ceiling: 20\n    distances: [0.05, 0.2, 0.8]\n"
      "    times: [0.01, 0.1, 0.5]\n",
      "sf.yaml");
  const auto res = run_campaign(cfg);
  REQUIRE(res.report.rows.size() == 3);
  for (const auto& r : res.report.rows) {
    INFO(r.case_name << ": " << r.detail);
    CHECK(r.status == CheckStatus::Pass);
  }
  REQUIRE(res.tables.size() == 1);
  CHECK(res.tables[0].rows.size() == 9);
}

TEST_CASE("calibration yields a valid profile bound to the model") {
  const auto cfg = parse_config("model:\n  kind: stable\n  dimension: 1\n  alpha: 1.0\nsimulation:\n  n_paths: 1000\n",
                                "cal.yaml");
  const auto p = calibrate_profile(cfg);
  CHECK_NOTHROW(p.validate());
  CHECK(p.model_fingerprint == build_model(cfg).fingerprint());
  CHECK(p.backend == "h-proxy");
  // the closed-form band for the Cauchy kernel bottoms out at 1 / (4 (1 + pi^2 / 16))
  CHECK(p.kernel_lower == doctest::Approx(0.9 / (4.0 * (1.0 + M_PI * M_PI / 16.0))).epsilon(1e-3));
  CHECK(p.factorization_lower <= p.kernel_lower);
}
