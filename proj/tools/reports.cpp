#include "reports.hpp"

#include <fstream>

namespace rspread::tools {

nlohmann::json check_to_json(const CheckReport& report, const std::string& subject) {
  nlohmann::json entry;
  entry["check"] = report.check;
  entry["subject"] = subject;
  entry["pass"] = report.passed;
  entry["max_violation"] = report.max_violation;
  entry["tolerance"] = report.tolerance;
  if (report.location) entry["location"] = *report.location;
  if (!report.detail.empty()) entry["detail"] = report.detail;
  return entry;
}

void DiagnosticsReport::add(const std::string& subject, const CheckReport& report) {
  overall_pass_ = overall_pass_ && report.passed;
  checks_.push_back(check_to_json(report, subject));
}

void DiagnosticsReport::note(const std::string& key, const nlohmann::json& value) {
  notes_[key] = value;
}

nlohmann::json DiagnosticsReport::to_json() const {
  nlohmann::json root;
  root["overall_pass"] = overall_pass_;
  root["checks"] = checks_;
  if (!notes_.empty()) root["notes"] = notes_;
  return root;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << content;
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& value) {
  write_text_file(path, value.dump(2) + "\n");
}

}  // namespace rspread::tools
