#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "heatlab/config.hpp"
#include "heatlab/profiles.hpp"

namespace heatlab {

enum class CheckStatus { Pass, Fail, Skipped };
std::string to_string(CheckStatus status);
CheckStatus check_status_from_string(const std::string& name);

/// One measured band. For MC checks the extremes already include the stated
/// confidence allowance; `statistic <= ceiling` decides the status.
struct ReportRow {
  std::string check;
  std::string case_name;
  std::string grid;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  double statistic = 0.0;
  double ceiling = 0.0;
  CheckStatus status = CheckStatus::Skipped;
  std::string detail;
  std::string config_hash;

  bool operator==(const ReportRow& other) const;
};

struct ValidationReport {
  std::string model;
  std::string domain;
  std::string profile;
  std::uint64_t seed = 0;
  std::string config_hash;
  std::vector<ReportRow> rows;

  bool passed() const;
  std::size_t count(CheckStatus status) const;
  std::vector<std::string> checks() const;

  void write_csv(std::ostream& out) const;
  static ValidationReport read_csv(std::istream& in);
  bool operator==(const ValidationReport& other) const;
};

/// Per-check numeric table; `plot` names the columns emitted as plot data and
/// `block`, when set, separates gnuplot data blocks.
struct DataTable {
  std::string check;
  std::vector<std::string> columns;
  std::vector<std::string> units;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> plot;
  std::string block;

  void write_csv(std::ostream& out) const;
  static DataTable read_csv(std::istream& in);
  /// Whitespace-separated columns with a comment header naming axes and units.
  void write_plotdata(std::ostream& out) const;
};

struct CampaignResult {
  ValidationReport report;
  std::vector<DataTable> tables;
  std::vector<std::string> warnings;
  /// Wall time per configured check, in config order; kept out of the CSVs.
  std::vector<double> check_seconds;
  double seconds = 0.0;
};

/// Runs every configured check; unsupported regimes become skipped rows.
CampaignResult run_campaign(const CampaignConfig& cfg);

/// Writes report.csv, summary.txt and one <check>.csv per table into `dir`.
void write_campaign(const CampaignResult& result, const CampaignConfig& cfg, const std::filesystem::path& dir);

/// Plot data for `check` from a report written by write_campaign.
void emit_plotdata(const std::filesystem::path& report, const std::string& check, std::ostream& out);

/// Profile resolved from the config (unit, calibrated or file).
ConstantProfile resolve_profile(const CampaignConfig& cfg, const ProcessModel& model);

/// Measures profile constants for the configured model on reference geometries.
ConstantProfile calibrate_profile(const CampaignConfig& cfg);

}  // namespace heatlab
