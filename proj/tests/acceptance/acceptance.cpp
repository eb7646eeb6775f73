// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "heatlab/campaign.hpp"
#include "heatlab/config.hpp"
#include "heatlab/dirichlet_bounds.hpp"
#include "heatlab/free_kernel.hpp"
#include "heatlab/numerics.hpp"
#include "heatlab/renewal.hpp"

namespace fs = std::filesystem;
using namespace heatlab;

namespace {

const fs::path kConfigs = HEATLAB_ACCEPTANCE_DIR;
fs::path g_out = "acceptance-out";

struct Verdict {
  bool pass = true;
  std::string note;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      note += (note.empty() ? "" : "; ") + std::string("FAILED ") + what;
    }
  }
  void info(const std::string& what) { note += (note.empty() ? "" : "; ") + what; }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

struct Campaign {
  CampaignConfig cfg;
  CampaignResult result;
  fs::path dir;
};

Campaign run(const std::string& stem, const fs::path& out_dir = {}, int threads = -1) {
  Campaign c;
  c.cfg = load_config(kConfigs / (stem + ".yaml"));
  if (threads >= 0) c.cfg.simulation.threads = static_cast<unsigned>(threads);
  c.result = run_campaign(c.cfg);
  c.dir = out_dir.empty() ? g_out / stem : out_dir;
  write_campaign(c.result, c.cfg, c.dir);
  return c;
}

const ReportRow* row(const Campaign& c, const std::string& check, const std::string& case_prefix) {
  for (const auto& r : c.result.report.rows) {
    if (r.check == check && r.case_name.rfind(case_prefix, 0) == 0) return &r;
  }
  return nullptr;
}

const ReportRow* row_named(const Campaign& c, const std::string& check, const std::string& case_name) {
  for (const auto& r : c.result.report.rows) {
    if (r.check == check && r.case_name == case_name) return &r;
  }
  return nullptr;
}

void require_rows_pass(Verdict& v, const Campaign& c, const std::string& label) {
  v.require(!c.result.report.rows.empty(), label + ": no rows");
  for (const auto& r : c.result.report.rows) {
    if (r.status == CheckStatus::Fail) v.require(false, label + " " + r.check + " [" + r.case_name + "]: " + r.detail);
  }
}

std::size_t table_rows(const Campaign& c, const std::string& check) {
  for (const auto& t : c.result.tables) {
    if (t.check == check) return t.rows.size();
  }
  return 0;
}

// ---------------------------------------------------------------------------

Verdict ac1() {
  Verdict v;
  const auto start = std::chrono::steady_clock::now();
  const auto c = run("ac1_cauchy_oracle");
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  require_rows_pass(v, c, "campaign");
  const auto model = build_model(c.cfg);
  double worst = 0.0;
  for (int i = 0; i <= 20; ++i) {
    const double r = 0.5 * i;
    const double exact = 1.0 / (M_PI * (1.0 + r * r));
    worst = std::max(worst, std::abs(p_free(model, 1.0, r) / exact - 1.0));
  }
  v.require(worst <= 1e-4, "relative error " + fmt(worst) + " > 1e-4");
  v.require(secs <= 10.0, "runtime " + fmt(secs) + " s");
  v.info("max rel err " + fmt(worst) + " on 21 radii, " + fmt(secs) + " s");
  return v;
}

Verdict ac2() {
  Verdict v;
  for (const auto& [stem, alpha] : std::vector<std::pair<std::string, double>>{
           {"ac2_renewal_a05", 0.5}, {"ac2_renewal_a10", 1.0}, {"ac2_renewal_a15", 1.5}}) {
    const auto c = run(stem);
    require_rows_pass(v, c, stem);
    const auto model = build_model(c.cfg);
    const auto exact = build_renewal_table(model, RenewalBackend::ExactLaplace);
    double worst = 0.0;
    for (double r : numerics::geomspace(1e-2, 1e2, 41)) {
      const double closed = std::pow(r, 0.5 * alpha) / std::tgamma(1.0 + 0.5 * alpha);
      worst = std::max(worst, std::abs(exact.V(r) / closed - 1.0));
    }
    v.require(worst <= 1e-3, "alpha=" + fmt(alpha) + " relative error " + fmt(worst));
    const auto* band = row(c, "renewal-exactness", "proxy-band");
    v.require(band && band->statistic <= 10.0, "alpha=" + fmt(alpha) + " proxy factor");
    v.info("alpha=" + fmt(alpha) + ": err " + fmt(worst) + ", K " + (band ? fmt(band->statistic) : "?"));
  }
  return v;
}

Verdict ac3() {
  Verdict v;
  for (const auto* stem : {"ac3_stable_d1", "ac3_stable_d2", "ac3_sum_of_stables_d2", "ac3_truncated_d1",
                           "ac3_subordinate_d3"}) {
    const auto c = run(stem);
    require_rows_pass(v, c, stem);
    const auto* grid = row(c, "free-kernel-envelope", "grid");
    const auto* fine = row(c, "free-kernel-envelope", "refined");
    if (!grid || !fine) {
      v.require(false, std::string(stem) + " missing band rows");
      continue;
    }
    const double K = std::max(grid->max_ratio, 1.0 / grid->min_ratio);
    const double Kf = std::max(fine->max_ratio, 1.0 / fine->min_ratio);
    v.require(std::abs(Kf / K - 1.0) <= 0.1, std::string(stem) + " K unstable under refinement");
    v.info(std::string(stem).substr(4) + " K=" + fmt(K) + "->" + fmt(Kf));
  }
  const auto t = run("ac3_truncated_d1");
  const auto* out = row_named(t, "free-kernel-envelope", "G_R R=10");
  const auto* in = row_named(t, "free-kernel-envelope", "G_R R=1");
  v.require(out && out->detail.rfind("fails", 0) == 0 && out->status == CheckStatus::Pass,
            "truncated G_R must fail outside the window");
  v.require(in && in->status == CheckStatus::Pass, "truncated G_R must hold inside the window");
  return v;
}

Verdict ac4() {
  Verdict v;
  for (const auto* stem : {"ac4_interval", "ac4_ball"}) {
    const auto c = run(stem);
    require_rows_pass(v, c, stem);
    v.require(table_rows(c, "survival-factorization") == 48, std::string(stem) + " grid is not 8 x 6");
    const auto* n1 = row(c, "survival-factorization", "n_paths=100000");
    const auto* n2 = row(c, "survival-factorization", "n_paths=200000");
    const auto* dbl = row(c, "survival-factorization", "doubling");
    v.require(n1 && n2 && dbl, std::string(stem) + " missing rows");
    if (n1 && n2 && dbl) {
      v.info(std::string(stem).substr(4) + " K=" + fmt(std::max(n1->max_ratio, 1.0 / n1->min_ratio)) + "->" +
             fmt(std::max(n2->max_ratio, 1.0 / n2->min_ratio)) + " widening " + fmt(dbl->statistic));
    }
  }
  return v;
}

Verdict ac5() {
  Verdict v;
  const auto c = run("ac5_cauchy_decay");
  require_rows_pass(v, c, "campaign");
  const auto* fit = row(c, "eigen-bracket", "decay-fit");
  v.require(fit != nullptr, "no decay fit");
  // independent lower end: (1/8)(r/diam)^2 / V^2(r) with r = 1, diam = 2
  const auto model = build_model(c.cfg);
  const auto table = build_table(c.cfg, model);
  const double lambda_low = 0.03125 / std::pow(table.V(1.0), 2);
  const DirichletBounds b(model, table, c.cfg.domain->build(1), resolve_profile(c.cfg, model));
  const auto e = b.eigen_bracket();
  v.require(std::abs(e.lambda_low / lambda_low - 1.0) < 1e-12, "lambda_low mismatch");
  if (fit) {
    // the row stores rate / lambda_high and rate / lambda_low
    const double rate = fit->max_ratio * e.lambda_low;
    v.require(rate >= e.lambda_low && rate <= e.lambda_high, "rate " + fmt(rate) + " outside bracket");
    v.require(fit->detail.find("+-") != std::string::npos, "no fit CI");
    v.info(fit->detail);
  }
  v.info("independent lambda_low " + fmt(lambda_low));
  return v;
}

Verdict ac6() {
  Verdict v;
  const auto c = run("ac6_halfline");
  require_rows_pass(v, c, "campaign");
  v.require(table_rows(c, "kernel-factorization") == 36, "grid is not 4 times x 3 x 3 pairs");
  if (const auto* r = row(c, "kernel-factorization", "3sigma")) v.info(r->detail);
  return v;
}

Verdict ac7() {
  Verdict v;
  const auto c = run("ac7_exterior");
  require_rows_pass(v, c, "campaign");
  v.require(table_rows(c, "survival-factorization") == 9, "grid is not 3 x 3");
  const auto* n1 = row(c, "survival-factorization", "n_paths=20000");
  const auto* n2 = row(c, "survival-factorization", "n_paths=40000");
  if (n1 && n2) {
    const double K1 = std::max(n1->max_ratio, 1.0 / n1->min_ratio), K2 = std::max(n2->max_ratio, 1.0 / n2->min_ratio);
    v.require(std::isfinite(K1) && std::isfinite(K2), "band not finite");
    v.info("K=" + fmt(K1) + "->" + fmt(K2));
  } else {
    v.require(false, "missing rows");
  }
  return v;
}

Verdict ac8() {
  Verdict v;
  const auto start = std::chrono::steady_clock::now();
  const auto c = run("ac8_structural");
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  require_rows_pass(v, c, "campaign");
  for (const auto* name : {"ub-product", "overshoot", "domain-monotonicity", "chapman-kolmogorov", "v-product",
                           "ikeda-watanabe"}) {
    v.require(row(c, name, "") != nullptr, std::string(name) + " missing");
  }
  v.require(row(c, "chapman-kolmogorov", "free") && row(c, "chapman-kolmogorov", "killed"), "both CK rows");
  v.require(secs <= 1800.0, "runtime " + fmt(secs) + " s");
  v.info(std::to_string(c.result.report.count(CheckStatus::Pass)) + " rows pass, " + fmt(secs) + " s");
  return v;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict ac9() {
  Verdict v;
  std::size_t files = 0;
  for (const auto* stem : {"ac5_cauchy_decay", "ac6_halfline"}) {
    const auto a = run(stem, g_out / "rerun" / (std::string(stem) + "-1"), 1);
    const auto b = run(stem, g_out / "rerun" / (std::string(stem) + "-2"), 3);
    for (const auto& e : fs::directory_iterator(a.dir)) {
      if (e.path().extension() != ".csv") continue;
      ++files;
      v.require(slurp(e.path()) == slurp(b.dir / e.path().filename()),
                std::string(stem) + "/" + e.path().filename().string() + " differs");
    }
  }
  v.info(std::to_string(files) + " CSV files identical across reruns with 1 and 3 threads");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) g_out = argv[1];
  fs::create_directories(g_out);
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"AC1 Cauchy free-kernel oracle", ac1},
      {"AC2 renewal exactness and proxy band", ac2},
      {"AC3 free-kernel envelope band", ac3},
      {"AC4 survival factorization (interval, disc)", ac4},
      {"AC5 bounded-domain decay inside eigen bracket", ac5},
      {"AC6 halfline kernel factorization", ac6},
      {"AC7 exterior-ball survival", ac7},
      {"AC8 structural inequalities", ac8},
      {"AC9 determinism", ac9},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Verdict v;
    try {
      v = fn();
    } catch (const std::exception& e) {
      v.pass = false;
      v.note = std::string("error: ") + e.what();
    }
    failed += !v.pass;
    std::cout << name.substr(0, 3) << ' ' << (v.pass ? "PASS" : "FAIL") << "  " << name.substr(4) << " | " << v.note
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
