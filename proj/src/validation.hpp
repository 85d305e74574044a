#pragma once

// The validation battery behind `validate` and `report`. Each check turns one
// asymptotic statement into a sweep with a monotone-trend or final-point test.

#include <string>
#include <vector>

#include <json.hpp>

#include "config.hpp"

namespace levybridge {

struct SweepTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  /// Header row, then one line per row; doubles printed with 17 significant digits.
  std::string to_csv() const;
};

struct CheckReport {
  std::string check;
  bool pass = false;
  nlohmann::json metrics = nlohmann::json::object();
  SweepTable sweep;
  /// The statement the check exercises, in words.
  std::string anchor;

  /// {check, pass, metrics, sweep} with the sweep as a list of column-keyed rows.
  nlohmann::json to_json() const;
};

const std::vector<std::string>& check_names();

/// Throws std::invalid_argument for an unknown check name.
CheckReport run_check(const std::string& name, const RunConfig& cfg);

/// Markdown summary table with one row per report.
std::string markdown_report(const std::vector<CheckReport>& reports, const RunConfig& cfg);

}  // namespace levybridge
