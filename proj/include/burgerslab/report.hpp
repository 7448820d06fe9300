#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace burgerslab {

/// One declared check: value compared against a tolerance from the config.
struct CheckItem {
  std::string name;
  int criterion = 0;   // acceptance criterion number, 0 if none
  double value = 0.0;
  std::string relation;  // "<=", ">=", "==", "in [a, b]", "report"
  double lower = 0.0;
  double upper = 0.0;
  bool pass = true;
  std::string detail;
  double seconds = 0.0;  // wall-clock of the check; not part of study.json
};

CheckItem check_at_most(std::string name, int criterion, double value, double limit, std::string detail = {});
CheckItem check_at_least(std::string name, int criterion, double value, double limit, std::string detail = {});
CheckItem check_within(std::string name, int criterion, double value, double lo, double hi, std::string detail = {});
CheckItem check_true(std::string name, int criterion, bool ok, std::string detail = {});
CheckItem report_only(std::string name, int criterion, double value, std::string detail = {});

struct Table {
  std::string file;  // e.g. "weak_residual.csv"
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct Plot {
  std::string file;  // e.g. "weak_gap.svg"
  std::string title;
  std::string x_label;
  std::string y_label;
  bool loglog = false;
  std::vector<Series> series;
};

struct StudyReport {
  std::string study;
  nlohmann::ordered_json config;
  std::vector<CheckItem> items;
  nlohmann::ordered_json data = nlohmann::ordered_json::object();  // per-study numeric results
  std::vector<Table> tables;
  std::vector<Plot> plots;
  double wall_clock_s = 0.0;

  bool passed() const;
};

/// Round-trip decimal text for a double; the only float formatter used in artifacts.
std::string format_number(double v);

nlohmann::ordered_json to_json(const StudyReport& report);

/// Writes study.json, one CSV per non-empty table, one SVG per non-empty plot,
/// and timing.json (wall-clock only). Returns the written paths.
std::vector<std::filesystem::path> emit_reports(const StudyReport& report, const std::filesystem::path& dir);

std::string render_svg(const Plot& plot);

}  // namespace burgerslab
