#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace nisqsim {

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<nlohmann::json>> rows;  ///< scalar cells
};

/// A command's output: the inputs that produced it, scalar results and tables.
struct Report {
  std::string command;
  nlohmann::json spec = nlohmann::json::object();
  nlohmann::json summary = nlohmann::json::object();
  std::vector<Table> tables;
  std::vector<std::string> warnings;
};

enum class ReportFormat { kText, kStructured, kCsv };

ReportFormat parse_report_format(const std::string& name);

std::string render_text(const Report& report);
/// JSON document {command, spec, summary, tables: {name: [row objects]}, warnings}.
std::string render_structured(const Report& report);
/// Spec and summary as "# key=value" comment lines, then each table with a
/// header row; several tables are separated by a blank line and a "# table:" line.
std::string render_csv(const Report& report);
std::string render(const Report& report, ReportFormat format);

/// Writes through a temporary file in the same directory and renames it into
/// place, so `path` either keeps its old contents or holds the whole report.
void write_file_atomically(const std::string& path, const std::string& contents);

}  // namespace nisqsim
