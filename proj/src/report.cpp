#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <fmt/format.h>

#include "nisqsim/report.hpp"

namespace nisqsim {

using nlohmann::json;

ReportFormat parse_report_format(const std::string& name) {
  if (name == "text") return ReportFormat::kText;
  if (name == "structured" || name == "json") return ReportFormat::kStructured;
  if (name == "csv") return ReportFormat::kCsv;
  throw std::invalid_argument(fmt::format("unknown format '{}' (text, structured, csv)", name));
}

namespace {

std::string cell(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return fmt::format("{:.6g}", v.get<double>());
  if (v.is_null()) return "";
  return v.dump();
}

std::string csv_cell(const json& v) {
  std::string s = v.is_number_float() ? fmt::format("{:.17g}", v.get<double>()) : cell(v);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (const char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + "\"";
}

void flatten(const json& obj, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
  for (const auto& [key, value] : obj.items()) {
    const std::string name = prefix.empty() ? key : prefix + "." + key;
    if (value.is_object()) {
      flatten(value, name, out);
    } else if (value.is_array()) {
      out.emplace_back(name, value.dump());
    } else {
      out.emplace_back(name, cell(value));
    }
  }
}

}  // namespace

std::string render_text(const Report& report) {
  std::string out = fmt::format("== {} ==\n", report.command);
  std::vector<std::pair<std::string, std::string>> lines;
  flatten(report.spec, "", lines);
  for (const auto& [k, v] : lines) out += fmt::format("  {}: {}\n", k, v);
  lines.clear();
  flatten(report.summary, "", lines);
  if (!lines.empty()) out += "\n";
  for (const auto& [k, v] : lines) out += fmt::format("{}: {}\n", k, v);
  for (const auto& table : report.tables) {
    std::vector<std::size_t> width;
    for (const auto& c : table.columns) width.push_back(c.size());
    std::vector<std::vector<std::string>> cells;
    for (const auto& row : table.rows) {
      auto& r = cells.emplace_back();
      for (std::size_t i = 0; i < row.size(); ++i) {
        r.push_back(cell(row[i]));
        if (i < width.size()) width[i] = std::max(width[i], r.back().size());
      }
    }
    out += fmt::format("\n[{}]\n", table.name);
    auto emit = [&](const std::vector<std::string>& r) {
      std::string line;
      for (std::size_t i = 0; i < r.size(); ++i) {
        line += fmt::format("{:>{}}", r[i], i < width.size() ? width[i] : 0);
        if (i + 1 < r.size()) line += "  ";
      }
      out += line + "\n";
    };
    emit(table.columns);
    for (const auto& r : cells) emit(r);
  }
  for (const auto& w : report.warnings) out += fmt::format("warning: {}\n", w);
  return out;
}

std::string render_structured(const Report& report) {
  json doc;
  doc["command"] = report.command;
  doc["spec"] = report.spec;
  doc["summary"] = report.summary;
  doc["tables"] = json::object();
  for (const auto& table : report.tables) {
    json rows = json::array();
    for (const auto& row : table.rows) {
      json obj = json::object();
      for (std::size_t i = 0; i < row.size() && i < table.columns.size(); ++i) obj[table.columns[i]] = row[i];
      rows.push_back(obj);
    }
    doc["tables"][table.name] = rows;
  }
  doc["warnings"] = report.warnings;
  return doc.dump(2) + "\n";
}

std::string render_csv(const Report& report) {
  std::string out;
  std::vector<std::pair<std::string, std::string>> lines;
  if (!report.spec.contains("command")) lines.emplace_back("command", report.command);
  flatten(report.spec, "", lines);
  flatten(report.summary, "", lines);
  for (const auto& [k, v] : lines) out += fmt::format("# {}={}\n", k, v);
  for (std::size_t t = 0; t < report.tables.size(); ++t) {
    const auto& table = report.tables[t];
    if (report.tables.size() > 1) out += fmt::format("{}# table: {}\n", t == 0 ? "" : "\n", table.name);
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
      out += csv_cell(table.columns[i]) + (i + 1 < table.columns.size() ? "," : "\n");
    }
    for (const auto& row : table.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out += csv_cell(row[i]) + (i + 1 < row.size() ? "," : "\n");
    }
  }
  return out;
}

std::string render(const Report& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::kText:
      return render_text(report);
    case ReportFormat::kStructured:
      return render_structured(report);
    case ReportFormat::kCsv:
      return render_csv(report);
  }
  return {};
}

void write_file_atomically(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += fmt::format(".tmp{}", static_cast<unsigned long>(std::hash<std::string>{}(contents) & 0xffffff));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", tmp.string()));
    out << contents;
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw std::runtime_error(fmt::format("failed while writing '{}'", tmp.string()));
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error(fmt::format("cannot move report into '{}': {}", path, ec.message()));
  }
}

}  // namespace nisqsim
